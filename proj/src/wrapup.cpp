#include "meetpat/wrapup.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "meetpat/error.hpp"

namespace meetpat {

ExtractedPoints extract_points(const Corpus& corpus) {
    ExtractedPoints out;
    for (const auto& meeting : corpus.meetings) {
        if (meeting.decision_windows.empty()) {
            out.warnings.push_back("meeting " + meeting.id + ": no decision windows, skipped");
            continue;
        }
        double end_s = 0.0;
        for (const auto& w : meeting.decision_windows) {
            end_s = std::max(end_s, w.end_s);
        }
        if (end_s <= 0.0) {
            out.warnings.push_back("meeting " + meeting.id + ": decision window ends at 0, skipped");
            continue;
        }
        double last_s = 0.0;
        for (const auto& act : meeting.acts) {
            last_s = std::max(last_s, act.time);
        }
        WrapupPoint p;
        p.meeting_id = meeting.id;
        p.x = end_s / 60.0;
        p.y = (last_s - end_s) / 60.0;
        if (p.y < 0.0) {
            p.y = 0.0;
            p.clamped = true;
        }
        out.points.push_back(p);
    }
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) {
        throw FitError("fit_line: need matching nonempty x and y");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        fit.sse += r * r;
    }
    return fit;
}

PiecewiseModel fit_piecewise(std::span<const WrapupPoint> points) {
    std::vector<std::pair<double, double>> sorted;
    for (const auto& p : points) {
        sorted.emplace_back(p.x, p.y);
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> xs, ys;
    for (const auto& [x, y] : sorted) {
        xs.push_back(x);
        ys.push_back(y);
    }

    bool found = false;
    PiecewiseModel best;
    const std::size_t n = xs.size();
    for (std::size_t split = 2; split + 2 <= n; ++split) {
        // split = number of points on the left
        if (xs[split - 1] == xs[split]) {
            continue;
        }
        const auto left = fit_line(std::span(xs).first(split), std::span(ys).first(split));
        const auto right = fit_line(std::span(xs).subspan(split), std::span(ys).subspan(split));
        const double sse = left.sse + right.sse;
        if (!found || sse < best.sse - 1e-9 * (1.0 + best.sse)) {
            found = true;
            best = {0.5 * (xs[split - 1] + xs[split]), left.slope, left.intercept,
                    right.slope, right.intercept, sse};
        }
    }
    if (!found) {
        throw FitError("fit_piecewise: need at least 4 points with 2 on each side of a breakpoint");
    }
    best.sse = piecewise_sse(best, points);
    return best;
}

WrapupPrediction predict_wrapup(const PiecewiseModel& model, double x) {
    const double y = x <= model.breakpoint ? model.left_slope * x + model.left_intercept
                                           : model.right_slope * x + model.right_intercept;
    if (y < 0.0) {
        return {0.0, true};
    }
    return {y, false};
}

double piecewise_sse(const PiecewiseModel& model, std::span<const WrapupPoint> points) {
    double sse = 0.0;
    for (const auto& p : points) {
        const double y_hat = p.x <= model.breakpoint ? model.left_slope * p.x + model.left_intercept
                                                     : model.right_slope * p.x + model.right_intercept;
        sse += (p.y - y_hat) * (p.y - y_hat);
    }
    return sse;
}

std::string points_csv(std::span<const WrapupPoint> points, const PiecewiseModel& model) {
    std::ostringstream out;
    out << std::setprecision(10) << "meeting,x,y,y_hat,clamped\n";
    for (const auto& p : points) {
        out << p.meeting_id << ',' << p.x << ',' << p.y << ',' << predict_wrapup(model, p.x).minutes
            << ',' << (p.clamped ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string model_json(const PiecewiseModel& model, const LineFit& single_line) {
    nlohmann::ordered_json j;
    j["breakpoint"] = model.breakpoint;
    j["left"] = {{"slope", model.left_slope}, {"intercept", model.left_intercept}};
    j["right"] = {{"slope", model.right_slope}, {"intercept", model.right_intercept}};
    j["sse"] = model.sse;
    j["single_line"] = {{"slope", single_line.slope},
                        {"intercept", single_line.intercept},
                        {"sse", single_line.sse}};
    return j.dump(2) + "\n";
}

} // namespace meetpat
