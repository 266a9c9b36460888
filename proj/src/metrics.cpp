#include "are/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace are {

std::size_t quantile_rank(std::size_t n, double return_period) {
    if (n == 0) {
        throw MetricsError("year loss table is empty");
    }
    if (!(return_period > 1.0) || !(return_period <= static_cast<double>(n))) {
        throw MetricsError("return period " + std::to_string(return_period) +
                           " outside (1, " + std::to_string(n) + "]");
    }
    const double x = static_cast<double>(n) * (1.0 - 1.0 / return_period);
    // Snap values within rounding noise of an integer so that e.g. 0.99 * 1000
    // selects rank 990 rather than 991.
    const double nearest = std::round(x);
    const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

namespace {

// Partially orders `buf` so that buf[k-1] is the k-th smallest and every
// element after it is >= it.
double select_rank(std::vector<double>& buf, std::size_t k) {
    auto nth = buf.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(buf.begin(), nth, buf.end());
    return *nth;
}

// Sorting the tail first makes the sum independent of how earlier selections
// left the buffer.
double tail_mean(std::vector<double>& buf, std::size_t k) {
    std::sort(buf.begin() + static_cast<std::ptrdiff_t>(k - 1), buf.end());
    double sum = 0.0;
    for (std::size_t i = k - 1; i < buf.size(); ++i) {
        sum += buf[i];
    }
    // Rounding in the sum can land a hair below the quantile when every tail
    // value is equal; the tail mean is never below its smallest member.
    return std::max(sum / static_cast<double>(buf.size() - k + 1), buf[k - 1]);
}

}  // namespace

double pml(std::span<const double> losses, double return_period) {
    const auto k = quantile_rank(losses.size(), return_period);
    std::vector<double> buf(losses.begin(), losses.end());
    return select_rank(buf, k);
}

double pml(const YearLossTable& ylt, double return_period) {
    return pml(std::span<const double>(ylt.losses), return_period);
}

double tvar(std::span<const double> losses, double return_period) {
    const auto k = quantile_rank(losses.size(), return_period);
    std::vector<double> buf(losses.begin(), losses.end());
    select_rank(buf, k);
    return tail_mean(buf, k);
}

double tvar(const YearLossTable& ylt, double return_period) {
    return tvar(std::span<const double>(ylt.losses), return_period);
}

std::vector<TailMetrics> tail_metrics(std::span<const double> losses,
                                      std::span<const double> return_periods) {
    std::vector<TailMetrics> out;
    out.reserve(return_periods.size());
    std::vector<double> buf(losses.begin(), losses.end());
    for (const double rp : return_periods) {
        const auto k = quantile_rank(losses.size(), rp);
        const double q = select_rank(buf, k);
        out.push_back({rp, q, tail_mean(buf, k)});
    }
    return out;
}

EPCurve ep_curve(std::span<const double> losses, std::span<const double> return_periods) {
    // probability -> loss, deduplicated on return period.
    std::map<double, double, std::greater<>> by_probability;
    std::vector<double> buf(losses.begin(), losses.end());
    for (const double rp : return_periods) {
        const auto k = quantile_rank(losses.size(), rp);
        by_probability[1.0 / rp] = select_rank(buf, k);
    }
    EPCurve curve;
    curve.points.reserve(by_probability.size());
    for (const auto& [prob, loss] : by_probability) {
        curve.points.push_back({loss, prob});
    }
    return curve;
}

EPCurve ep_curve(const YearLossTable& ylt, std::span<const double> return_periods) {
    return ep_curve(std::span<const double>(ylt.losses), return_periods);
}

YearLossTable portfolio_rollup(std::span<const YearLossTable> ylts) {
    if (ylts.empty()) {
        throw MetricsError("roll-up needs at least one year loss table");
    }
    YearLossTable out{"portfolio", ylts.front().losses};
    if (ylts.size() == 1) {
        out.layer_id = ylts.front().layer_id;
        return out;
    }
    for (std::size_t j = 1; j < ylts.size(); ++j) {
        if (ylts[j].losses.size() != out.losses.size()) {
            throw MetricsError("year loss tables differ in trial count: " +
                               std::to_string(out.losses.size()) + " vs " +
                               std::to_string(ylts[j].losses.size()));
        }
        for (std::size_t i = 0; i < out.losses.size(); ++i) {
            out.losses[i] += ylts[j].losses[i];
        }
    }
    return out;
}

}  // namespace are
