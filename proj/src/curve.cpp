#include "wiretap/curve.hpp"

#include <cmath>
#include <stdexcept>

namespace wiretap {

namespace {

// Zero values cannot be interpolated in log domain; floor them well below any
// probability the toolkit can distinguish. Stored values are not modified.
constexpr double kLogFloor = -330.0;

double safe_log10(double v) { return v > 0.0 ? std::log10(v) : kLogFloor; }

} // namespace

ErrorRateCurve::ErrorRateCurve(std::vector<double> snr_db, std::vector<double> values,
                               CurveKind kind, CurveSource source)
    : snr_db_(std::move(snr_db)), values_(std::move(values)), kind_(kind), source_(source) {
    if (snr_db_.empty() || snr_db_.size() != values_.size())
        throw std::invalid_argument("ErrorRateCurve: empty or mismatched point lists");
    for (std::size_t i = 0; i < snr_db_.size(); ++i) {
        if (!std::isfinite(snr_db_[i]))
            throw std::invalid_argument("ErrorRateCurve: SNR not finite");
        if (i > 0 && snr_db_[i] <= snr_db_[i - 1])
            throw std::invalid_argument("ErrorRateCurve: grid not strictly increasing");
        if (!(values_[i] >= 0.0 && values_[i] <= 1.0))
            throw std::invalid_argument("ErrorRateCurve: value outside [0,1]");
    }
}

double ErrorRateCurve::eval_db(double snr_db, bool* clamped) const {
    if (clamped) *clamped = false;
    if (snr_db <= snr_db_.front()) {
        if (clamped && snr_db < snr_db_.front()) *clamped = true;
        return values_.front();
    }
    if (snr_db >= snr_db_.back()) {
        if (clamped && snr_db > snr_db_.back()) *clamped = true;
        return values_.back();
    }
    std::size_t hi = 1;
    while (snr_db_[hi] < snr_db) ++hi;
    const std::size_t lo = hi - 1;
    const double u = (snr_db - snr_db_[lo]) / (snr_db_[hi] - snr_db_[lo]);
    const double ly = safe_log10(values_[lo]) * (1.0 - u) + safe_log10(values_[hi]) * u;
    return std::pow(10.0, ly);
}

bool ErrorRateCurve::nonincreasing(double rel_slack) const {
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (values_[i] > values_[i - 1] * (1.0 + rel_slack) &&
            values_[i] > values_[i - 1] + 1e-300)
            return false;
    return true;
}

} // namespace wiretap
