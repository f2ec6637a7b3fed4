#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bodega/common.hpp"

namespace bodega {

/// Closed-form false-positive probability of a classic bloom filter with
/// n_bits bits storing n elements, using the optimal (rounded) hash count:
/// (1 - e^{-n_h n / n_b})^{n_h}. An empty filter has rate 0; a filter with
/// no bits but a nonempty set degenerates to 1.
double cbf_fpr(std::uint64_t n_bits, std::uint64_t n);

struct LearnedRates {
    double fp_l = 0.0;  // model false-positive rate
    double tn_l = 0.0;  // model true-negative rate over the benign stream
};

/// fp_L = c * cbf_fpr(n_bits_equiv, n); tn_L = (1 - fp_L) * q_n.
LearnedRates learned_rates(std::uint64_t n_bits_equiv, std::uint64_t n, double c, double q_n);

/// Non-adversarial composition: fp_L * fp_A + tn_L * fp_B.
double lbf_fpr_composed(double fp_l, double fp_a, double tn_l, double fp_b);

/// Adversarial single-query bound: max(fp_A, fp_B).
double adversarial_bound(double fp_a, double fp_b);

/// Parameter bundle for the closed-form workload model. Memory is in bytes.
/// backup_a_share models the fraction of the stored set held by backup A
/// (the formulas need realized per-backup set sizes, which a pure-formula
/// scenario cannot otherwise know).
struct AnalyticScenario {
    std::uint64_t m_total_bytes = 2 * 1024 * 1024;
    std::uint64_t m_model_bytes = 1024 * 1024;
    std::uint64_t m_backup_a_bytes = 512 * 1024;
    std::uint64_t m_backup_b_bytes = 512 * 1024;
    std::uint64_t set_size = 1'700'000;
    double c = 0.25;
    double q_n = 0.5;
    double alpha = 0.0;
    double alpha_p = 0.0;
    double alpha_n = 0.0;
    std::uint32_t lambda_bits = 128;
    double backup_a_share = 0.5;

    void validate() const;

    std::uint64_t backup_a_set() const;
    std::uint64_t backup_b_set() const { return set_size - backup_a_set(); }

    static AnalyticScenario table1();
};

/// Workload mix: alpha_p * fp_A + alpha_n * fp_B + (1 - alpha_p - alpha_n) * composed.
double mixed_workload_fpr(const AnalyticScenario& scenario);

enum class SweepAxis { Alpha, Strategy, QN, Memory };

struct SweepRow {
    double axis_value = 0.0;
    double bodega_fpr = 0.0;
    double ny_cbf_fpr = 0.0;
};

struct SweepTable {
    SweepAxis axis;
    std::vector<SweepRow> rows;
};

/// Evaluates the workload model over a grid. The comparator is a single
/// keyed CBF given m_total minus one key's worth of bits. The memory axis
/// rescales the whole budget, keeping the scenario's internal proportions.
SweepTable sweep(const AnalyticScenario& base, SweepAxis axis, std::span<const double> grid);

std::string sweep_axis_name(SweepAxis axis);

/// Plot-data contract: schema comment, header row, one row per grid point.
void write_sweep_csv(std::ostream& out, const SweepTable& table);

}  // namespace bodega
