// Security-gap extraction from error-rate curves.
#pragma once

#include "wiretap/curve.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wiretap::secgap {

class NoCrossingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonMonotoneCurveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SecurityThresholds {
    double pe_bob_max = 1e-5; // intended receiver must do at least this well
    double pe_eve_min = 0.4;  // eavesdropper must do at least this badly
};

enum class Direction {
    first_below, // smallest SNR where the curve is at or below the target
    last_above   // largest SNR where the curve is at or above the target
};

// Crossing SNR located on the interpolated curve to within 0.01 dB. A target
// met at a grid endpoint returns that endpoint; a target the curve never
// meets raises NoCrossingError.
double snr_at(const ErrorRateCurve& curve, double target, Direction dir);

struct GapResult {
    double snr_bob_db = 0.0; // SNR needed for reliability
    double snr_eve_db = 0.0; // SNR below which secrecy holds
    double gap_db = 0.0;     // snr_bob_db - snr_eve_db
};

// Both thresholds are read off the same curve: the receivers differ only in
// SNR. Refuses curves that are not (numerically) nonincreasing, since the
// two crossings are then ill-defined.
GapResult security_gap(const ErrorRateCurve& curve, const SecurityThresholds& thresholds);

// Evaluates f over the grid and packages the result.
ErrorRateCurve sweep(const std::vector<double>& grid_db,
                     const std::function<double(double)>& f, CurveKind kind,
                     CurveSource source);

// start..stop inclusive with the given step; the final point lands on stop
// within one part in 1e9 of the step.
std::vector<double> make_grid(double start_db, double stop_db, double step_db);

} // namespace wiretap::secgap
