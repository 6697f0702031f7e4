#ifndef meetpat_wrapup_hpp
#define meetpat_wrapup_hpp

#include <span>
#include <string>
#include <vector>

#include "meetpat/corpus.hpp"

namespace meetpat {

struct WrapupPoint {
    double x = 0.0;        // minutes until the last decision window ends
    double y = 0.0;        // wrap-up minutes after that
    bool clamped = false;  // y was negative and set to 0
    std::string meeting_id;
};

struct ExtractedPoints {
    std::vector<WrapupPoint> points;
    std::vector<std::string> warnings;
};

/// Meetings without decision windows, or whose windows end at time 0, are
/// skipped with a warning.
ExtractedPoints extract_points(const Corpus& corpus);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
};

/// Ordinary least squares; a zero x-spread gives slope 0 through the mean.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct PiecewiseModel {
    double breakpoint = 0.0;
    double left_slope = 0.0;
    double left_intercept = 0.0;
    double right_slope = 0.0;
    double right_intercept = 0.0;
    double sse = 0.0;
};

/*
 * Two independent OLS segments split at the breakpoint minimizing the total
 * SSE. Candidate breakpoints are the midpoints between consecutive distinct
 * x values leaving at least two points per side. Ties go to the smaller
 * breakpoint. Throws FitError when no candidate exists.
 */
PiecewiseModel fit_piecewise(std::span<const WrapupPoint> points);

struct WrapupPrediction {
    double minutes = 0.0;
    bool floored = false;
};

/// Left segment for x <= breakpoint, right segment otherwise, floored at 0.
WrapupPrediction predict_wrapup(const PiecewiseModel& model, double x);

/// Residual sum of squares of `model` on `points`.
double piecewise_sse(const PiecewiseModel& model, std::span<const WrapupPoint> points);

std::string points_csv(std::span<const WrapupPoint> points, const PiecewiseModel& model);
std::string model_json(const PiecewiseModel& model, const LineFit& single_line);

} // namespace meetpat

#endif
