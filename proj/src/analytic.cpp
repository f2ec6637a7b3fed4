#include "bodega/analytic.hpp"

#include <cmath>
#include <ostream>

#include "bodega/filters.hpp"

namespace bodega {

double cbf_fpr(std::uint64_t n_bits, std::uint64_t n) {
    if (n == 0) return 0.0;
    if (n_bits == 0) return 1.0;
    std::uint32_t n_h = optimal_hash_count(n_bits, n);
    double x = static_cast<double>(n_h) * static_cast<double>(n) / static_cast<double>(n_bits);
    return std::pow(1.0 - std::exp(-x), static_cast<double>(n_h));
}

LearnedRates learned_rates(std::uint64_t n_bits_equiv, std::uint64_t n, double c, double q_n) {
    if (c <= 0.0 || c > 1.0) throw InvalidInput("c must be in (0, 1]");
    if (q_n < 0.0 || q_n > 1.0) throw InvalidInput("q_n must be in [0, 1]");
    LearnedRates r;
    r.fp_l = c * cbf_fpr(n_bits_equiv, n);
    r.tn_l = (1.0 - r.fp_l) * q_n;
    return r;
}

double lbf_fpr_composed(double fp_l, double fp_a, double tn_l, double fp_b) {
    for (double v : {fp_l, fp_a, tn_l, fp_b})
        if (v < 0.0 || v > 1.0) throw InvalidInput("rates must be in [0, 1]");
    return fp_l * fp_a + tn_l * fp_b;
}

double adversarial_bound(double fp_a, double fp_b) {
    for (double v : {fp_a, fp_b})
        if (v < 0.0 || v > 1.0) throw InvalidInput("rates must be in [0, 1]");
    return std::max(fp_a, fp_b);
}

void AnalyticScenario::validate() const {
    for (double v : {q_n, alpha, alpha_p, alpha_n, backup_a_share})
        if (v < 0.0 || v > 1.0) throw InvalidInput("scenario fractions must be in [0, 1]");
    if (c <= 0.0 || c > 1.0) throw InvalidInput("c must be in (0, 1]");
    if (alpha_p + alpha_n > 1.0 + 1e-12)
        throw InvalidInput("alpha_p + alpha_n must not exceed 1");
    if (set_size == 0) throw InvalidInput("scenario set size must be >= 1");
    // Key bits are accounted on top of the component budgets.
    if (m_model_bytes + m_backup_a_bytes + m_backup_b_bytes > m_total_bytes)
        throw InvalidInput("component budgets exceed the total memory budget");
}

std::uint64_t AnalyticScenario::backup_a_set() const {
    return static_cast<std::uint64_t>(
        std::llround(backup_a_share * static_cast<double>(set_size)));
}

AnalyticScenario AnalyticScenario::table1() { return AnalyticScenario{}; }

double mixed_workload_fpr(const AnalyticScenario& s) {
    s.validate();
    double fp_a = cbf_fpr(8 * s.m_backup_a_bytes, s.backup_a_set());
    double fp_b = cbf_fpr(8 * s.m_backup_b_bytes, s.backup_b_set());
    LearnedRates lr = learned_rates(8 * s.m_model_bytes, s.set_size, s.c, s.q_n);
    double composed = lbf_fpr_composed(lr.fp_l, fp_a, lr.tn_l, fp_b);
    return s.alpha_p * fp_a + s.alpha_n * fp_b + (1.0 - s.alpha_p - s.alpha_n) * composed;
}

SweepTable sweep(const AnalyticScenario& base, SweepAxis axis, std::span<const double> grid) {
    if (grid.empty()) throw InvalidInput("sweep grid must be nonempty");
    SweepTable table;
    table.axis = axis;
    table.rows.reserve(grid.size());
    double ny_const =
        cbf_fpr(8 * base.m_total_bytes - base.lambda_bits, base.set_size);
    for (double v : grid) {
        AnalyticScenario s = base;
        double ny = ny_const;
        switch (axis) {
            case SweepAxis::Alpha:
                s.alpha = v;
                s.alpha_p = v / 2.0;
                s.alpha_n = v / 2.0;
                break;
            case SweepAxis::Strategy:
                // v = alpha_p / alpha at fixed alpha
                s.alpha_p = v * s.alpha;
                s.alpha_n = (1.0 - v) * s.alpha;
                break;
            case SweepAxis::QN:
                s.q_n = v;
                break;
            case SweepAxis::Memory: {
                // v = total bytes; rescale components proportionally.
                // Floors keep the component sum within the scaled total.
                double scale = v / static_cast<double>(base.m_total_bytes);
                s.m_total_bytes = static_cast<std::uint64_t>(std::floor(v));
                s.m_model_bytes = static_cast<std::uint64_t>(
                    std::floor(scale * static_cast<double>(base.m_model_bytes)));
                s.m_backup_a_bytes = static_cast<std::uint64_t>(
                    std::floor(scale * static_cast<double>(base.m_backup_a_bytes)));
                s.m_backup_b_bytes = static_cast<std::uint64_t>(
                    std::floor(scale * static_cast<double>(base.m_backup_b_bytes)));
                ny = cbf_fpr(8 * s.m_total_bytes - s.lambda_bits, s.set_size);
                break;
            }
        }
        table.rows.push_back({v, mixed_workload_fpr(s), ny});
    }
    return table;
}

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::Strategy: return "alpha_p_over_alpha";
        case SweepAxis::QN: return "q_n";
        case SweepAxis::Memory: return "m_total_bytes";
    }
    return "?";
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
    out << "# bodega-sweep-v1\n";
    out << sweep_axis_name(table.axis) << ",bodega_fpr,ny_cbf_fpr\n";
    char buf[128];
    for (const SweepRow& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", row.axis_value, row.bodega_fpr,
                      row.ny_cbf_fpr);
        out << buf;
    }
}

}  // namespace bodega
