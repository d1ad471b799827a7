// Sampled error-rate curve over an Eb/N0 grid.
#pragma once

#include <cstddef>
#include <vector>

namespace wiretap {

enum class CurveKind { fer, ber };
enum class CurveSource { analytic, simulated };

// Points are (snr_db, value) with a strictly increasing grid and values in
// [0, 1]. Evaluation interpolates log10(value) linearly in dB, which is the
// straight-line model for waterfall curves on their usual axes.
class ErrorRateCurve {
public:
    ErrorRateCurve(std::vector<double> snr_db, std::vector<double> values,
                   CurveKind kind, CurveSource source);

    std::size_t size() const { return snr_db_.size(); }
    const std::vector<double>& snr_db() const { return snr_db_; }
    const std::vector<double>& values() const { return values_; }
    CurveKind kind() const { return kind_; }
    CurveSource source() const { return source_; }

    // Outside the grid the nearest endpoint value is returned and *clamped,
    // when given, is set.
    double eval_db(double snr_db, bool* clamped = nullptr) const;

    // True when values never rise by more than rel_slack relative.
    bool nonincreasing(double rel_slack = 0.0) const;

private:
    std::vector<double> snr_db_;
    std::vector<double> values_;
    CurveKind kind_;
    CurveSource source_;
};

} // namespace wiretap
