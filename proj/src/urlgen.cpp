#include "bodega/urlgen.hpp"

#include <ostream>
#include <unordered_set>

namespace bodega {

namespace {

const char* kWords[] = {
    "acorn",  "harbor", "violet", "meadow", "copper",  "lantern", "summit", "willow",
    "ember",  "quartz", "cedar",  "marble", "prairie", "falcon",  "timber", "breeze",
    "canyon", "orchid", "beacon", "garnet", "juniper", "mosaic",  "pebble", "saffron",
    "tundra", "velvet", "wander", "zephyr", "anchor",  "bramble", "cobalt", "drift",
    "news",   "shop",   "blog",   "mail",   "wiki",    "cloud",   "photo",  "music",
    "games",  "store",  "forum",  "docs",   "maps",    "video",   "home",   "data",
};
const char* kTlds[] = {"com", "org", "net", "io", "edu", "info"};
const char* kBaitWords[] = {"login", "verify", "secure", "update", "account",
                            "bank",  "paypal", "signin", "confirm", "webscr"};
const char* kShortenerHosts[] = {"bit.ly", "tinyurl.com", "goo.gl", "t.co", "ow.ly", "is.gd"};

std::string word(Rng& rng) {
    return kWords[rng() % (sizeof(kWords) / sizeof(kWords[0]))];
}

std::string digits(Rng& rng, int len) {
    std::string out;
    for (int i = 0; i < len; ++i) out += static_cast<char>('0' + rng() % 10);
    return out;
}

std::string token(Rng& rng, int len) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string out;
    for (int i = 0; i < len; ++i) out += alphabet[rng() % 36];
    return out;
}

std::string benign_url(Rng& rng) {
    std::string url = "https://";
    if (rng() % 3 == 0) url += "www.";
    url += word(rng);
    if (rng() % 4 == 0) url += word(rng);
    url += ".";
    url += kTlds[rng() % 6];
    int depth = static_cast<int>(rng() % 3);
    for (int i = 0; i < depth; ++i) url += "/" + word(rng);
    if (rng() % 8 == 0) url += "/" + word(rng) + std::to_string(rng() % 100);
    return url;
}

std::string malicious_url(Rng& rng) {
    std::string url;
    switch (rng() % 4) {
        case 0: {  // bare-address host with bait path
            url = "http://";
            for (int i = 0; i < 4; ++i)
                url += (i ? "." : "") + std::to_string(rng() % 256);
            url += "/";
            url += kBaitWords[rng() % 10];
            url += "/" + token(rng, 8) + "-" + digits(rng, 6);
            break;
        }
        case 1: {  // shortener with opaque token
            url = "http://";
            url += kShortenerHosts[rng() % 6];
            url += "/" + token(rng, 7);
            break;
        }
        case 2: {  // subdomain pile impersonating a brand
            url = "http://";
            url += kBaitWords[rng() % 10];
            url += "-" + word(rng) + "." + token(rng, 6) + "-" + digits(rng, 3) + "." +
                   word(rng) + ".xyz/";
            url += kBaitWords[rng() % 10];
            url += "?id=" + digits(rng, 8) + "&s=" + token(rng, 10);
            break;
        }
        default: {  // deep digit-heavy path
            url = "http://" + word(rng) + digits(rng, 4) + "." + kTlds[rng() % 6];
            int depth = 3 + static_cast<int>(rng() % 4);
            for (int i = 0; i < depth; ++i) url += "/" + token(rng, 5) + digits(rng, 4);
            url += "?" + token(rng, 4) + "=" + digits(rng, 9);
            break;
        }
    }
    return url;
}

}  // namespace

UrlCorpus generate_url_corpus(const UrlCorpusConfig& config) {
    Rng rng(derive_seed(config.seed, 0x0b1));
    UrlCorpus out;
    std::unordered_set<std::string> seen;
    auto emit = [&](std::vector<RawKey>& dst, std::size_t want, bool malicious) {
        while (dst.size() < want) {
            // A slice of each class wears the other class's style.
            bool crossover = rng() % 100 < 8;
            std::string url = (malicious != crossover) ? malicious_url(rng) : benign_url(rng);
            if (seen.insert(url).second) dst.push_back(std::move(url));
        }
    };
    emit(out.malicious, config.malicious, true);
    emit(out.benign, config.benign, false);
    return out;
}

void write_dataset(std::ostream& out, const UrlCorpus& corpus) {
    for (const RawKey& k : corpus.malicious) out << "1," << k << '\n';
    for (const RawKey& k : corpus.benign) out << "0," << k << '\n';
}

}  // namespace bodega
