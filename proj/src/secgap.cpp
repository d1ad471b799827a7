#include "wiretap/secgap.hpp"

#include <cmath>

namespace wiretap::secgap {

namespace {

constexpr double kSnrTolDb = 0.01;

double bisect(const ErrorRateCurve& curve, double target, double lo, double hi,
              bool below) {
    // Invariant: the predicate holds at hi (below) or lo (above).
    while (hi - lo > kSnrTolDb) {
        const double mid = 0.5 * (lo + hi);
        const bool ok = below ? curve.eval_db(mid) <= target : curve.eval_db(mid) >= target;
        if (below) {
            (ok ? hi : lo) = mid;
        } else {
            (ok ? lo : hi) = mid;
        }
    }
    return below ? hi : lo;
}

} // namespace

double snr_at(const ErrorRateCurve& curve, double target, Direction dir) {
    if (!(target > 0.0 && target < 1.0))
        throw std::invalid_argument("snr_at: target outside (0,1)");
    const auto& x = curve.snr_db();
    const auto& v = curve.values();
    const std::size_t n = x.size();

    if (dir == Direction::first_below) {
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] > target) continue;
            if (i == 0 || v[i] == target) return x[i];
            return bisect(curve, target, x[i - 1], x[i], true);
        }
        throw NoCrossingError("snr_at: curve never reaches target from above");
    }
    for (std::size_t i = n; i-- > 0;) {
        if (v[i] < target) continue;
        if (i == n - 1 || v[i] == target) return x[i];
        return bisect(curve, target, x[i], x[i + 1], false);
    }
    throw NoCrossingError("snr_at: curve never reaches target from below");
}

GapResult security_gap(const ErrorRateCurve& curve, const SecurityThresholds& thresholds) {
    // Equal thresholds are admitted as the degenerate zero-gap case.
    if (!(thresholds.pe_bob_max > 0.0 && thresholds.pe_bob_max <= thresholds.pe_eve_min &&
          thresholds.pe_eve_min <= 0.5))
        throw std::invalid_argument("security_gap: need 0 < pe_bob_max <= pe_eve_min <= 0.5");
    if (!curve.nonincreasing(1e-9))
        throw NonMonotoneCurveError("security_gap: curve is not nonincreasing");
    GapResult out;
    out.snr_bob_db = snr_at(curve, thresholds.pe_bob_max, Direction::first_below);
    out.snr_eve_db = snr_at(curve, thresholds.pe_eve_min, Direction::last_above);
    out.gap_db = out.snr_bob_db - out.snr_eve_db;
    return out;
}

ErrorRateCurve sweep(const std::vector<double>& grid_db,
                     const std::function<double(double)>& f, CurveKind kind,
                     CurveSource source) {
    std::vector<double> values;
    values.reserve(grid_db.size());
    for (double db : grid_db) values.push_back(f(db));
    return ErrorRateCurve(grid_db, std::move(values), kind, source);
}

std::vector<double> make_grid(double start_db, double stop_db, double step_db) {
    if (!(step_db > 0.0) || stop_db < start_db)
        throw std::invalid_argument("make_grid: need start <= stop and step > 0");
    std::vector<double> grid;
    const double span = stop_db - start_db;
    const std::size_t steps = static_cast<std::size_t>(std::floor(span / step_db + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) grid.push_back(start_db + step_db * static_cast<double>(i));
    return grid;
}

} // namespace wiretap::secgap
