#ifndef ARE_METRICS_HPP
#define ARE_METRICS_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "are/domain.hpp"

namespace are {

class MetricsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EPPoint {
    double loss = 0.0;
    double exceedance_probability = 0.0;
};

// Probabilities strictly decreasing, losses non-decreasing.
struct EPCurve {
    std::vector<EPPoint> points;
};

// 1-based rank of the order statistic used for a return period over n
// trials: ceil((1 - 1/rp) * n). Throws MetricsError unless 1 < rp <= n.
std::size_t quantile_rank(std::size_t n, double return_period);

// Empirical (1 - 1/rp) quantile: the k-th smallest loss, no interpolation.
double pml(std::span<const double> losses, double return_period);
double pml(const YearLossTable& ylt, double return_period);

// Mean of the order statistics k..n, the PML point included.
double tvar(std::span<const double> losses, double return_period);
double tvar(const YearLossTable& ylt, double return_period);

struct TailMetrics {
    double return_period = 0.0;
    double pml = 0.0;
    double tvar = 0.0;
};

// PML and TVAR for several return periods sharing one selection buffer.
std::vector<TailMetrics> tail_metrics(std::span<const double> losses,
                                      std::span<const double> return_periods);

EPCurve ep_curve(const YearLossTable& ylt, std::span<const double> return_periods);
EPCurve ep_curve(std::span<const double> losses, std::span<const double> return_periods);

// Per-trial sum across layers. Throws MetricsError on length mismatch or an
// empty input.
YearLossTable portfolio_rollup(std::span<const YearLossTable> ylts);

}  // namespace are

#endif  // ARE_METRICS_HPP
