#include "meetpat/generalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "meetpat/error.hpp"

namespace meetpat {

std::string to_string(uint128 value) {
    if (value == 0) {
        return "0";
    }
    std::string out;
    while (value > 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
        value /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

namespace {

double log_binomial(double a, double b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

double log_add(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity()) {
        return y;
    }
    if (y == -std::numeric_limits<double>::infinity()) {
        return x;
    }
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

bool mul_checked(uint128 a, uint128 b, uint128 limit, uint128& out) {
    if (a != 0 && b > limit / a) {
        return false;
    }
    out = a * b;
    return out <= limit;
}

bool add_checked(uint128 a, uint128 b, uint128 limit, uint128& out) {
    if (b > limit - std::min(a, limit)) {
        return false;
    }
    out = a + b;
    return true;
}

// C(a, b) exactly, or false on overflow past `limit`
bool binomial_checked(std::size_t a, std::size_t b, uint128 limit, uint128& out) {
    if (b > a) {
        out = 0;
        return true;
    }
    b = std::min(b, a - b);
    uint128 value = 1;
    for (std::size_t i = 1; i <= b; ++i) {
        // value * (a - b + i) is divisible by i
        uint128 next;
        if (!mul_checked(value, static_cast<uint128>(a - b + i), limit, next)) {
            return false;
        }
        value = next / i;
    }
    out = value;
    return true;
}

} // namespace

double log_count_templates(std::size_t L, std::size_t B, std::size_t alphabet_size) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const double log_a = alphabet_size == 0 ? neg_inf : std::log(static_cast<double>(alphabet_size));
    double total = neg_inf;
    for (std::size_t n = 0; n <= L; ++n) {
        const double slots = static_cast<double>(n) * static_cast<double>(n - (n > 0 ? 1 : 0)) / 2.0;
        double arrows = neg_inf;
        for (std::size_t b = 0; b <= std::min(B, n); ++b) {
            if (static_cast<double>(b) > slots) {
                break;
            }
            arrows = log_add(arrows, log_binomial(slots, static_cast<double>(b)));
        }
        const double labels = n == 0 ? 0.0 : static_cast<double>(n) * log_a;
        total = log_add(total, labels + arrows);
    }
    return total;
}

std::optional<uint128> exact_count_templates(std::size_t L, std::size_t B,
                                             std::size_t alphabet_size, unsigned budget_bits) {
    budget_bits = std::clamp(budget_bits, 1u, 128u);
    const uint128 limit = budget_bits == 128 ? ~static_cast<uint128>(0)
                                             : (static_cast<uint128>(1) << budget_bits) - 1;
    uint128 total = 0;
    uint128 power = 1;   // alphabet_size^n
    for (std::size_t n = 0; n <= L; ++n) {
        if (n > 0 && !mul_checked(power, alphabet_size, limit, power)) {
            return std::nullopt;
        }
        const std::size_t slots = n * (n > 0 ? n - 1 : 0) / 2;
        uint128 arrows = 0;
        for (std::size_t b = 0; b <= std::min(B, n); ++b) {
            uint128 c;
            if (!binomial_checked(slots, b, limit, c) || !add_checked(arrows, c, limit, arrows)) {
                return std::nullopt;
            }
        }
        uint128 term;
        if (!mul_checked(power, arrows, limit, term) || !add_checked(total, term, limit, total)) {
            return std::nullopt;
        }
    }
    return total;
}

TemplateCount count_templates(std::size_t L, std::size_t B, std::size_t alphabet_size,
                              unsigned budget_bits) {
    return {exact_count_templates(L, B, alphabet_size, budget_bits),
            log_count_templates(L, B, alphabet_size)};
}

double risk_bound(const BoundInputs& in) {
    if (!(in.delta > 0.0 && in.delta < 1.0)) {
        throw ValidationError("delta must lie in (0, 1)");
    }
    if (in.m == 0) {
        throw ValidationError("m must be at least 1");
    }
    if (!(in.r_emp >= 0.0) || !(in.loss_scale > 0.0)) {
        throw ValidationError("r_emp must be nonnegative and loss_scale positive");
    }
    const double log_count = log_count_templates(in.L, in.B, in.alphabet_size);
    return in.r_emp +
           in.loss_scale * std::sqrt((log_count + std::log(1.0 / in.delta)) /
                                     (2.0 * static_cast<double>(in.m)));
}

std::vector<Template> enumerate_templates(std::size_t L, std::size_t B, std::size_t alphabet_size,
                                          std::size_t cap) {
    std::vector<Template> out;
    if (alphabet_size == 0) {
        return out;
    }
    auto push = [&](Template t) {
        if (out.size() >= cap) {
            throw RefusalError("template enumeration exceeds cap of " + std::to_string(cap));
        }
        out.push_back(std::move(t));
    };
    for (std::size_t n = 1; n <= L; ++n) {
        std::vector<BackEdge> slots;
        for (std::size_t from = 1; from < n; ++from) {
            for (std::size_t to = 0; to < from; ++to) {
                slots.push_back({from, to});
            }
        }
        // all edge subsets of size <= B, as lexicographic index combinations
        std::vector<std::vector<BackEdge>> edge_sets;
        std::vector<BackEdge> chosen;
        auto choose = [&](auto&& self, std::size_t start) -> void {
            edge_sets.push_back(chosen);
            if (chosen.size() == B) {
                return;
            }
            for (std::size_t i = start; i < slots.size(); ++i) {
                chosen.push_back(slots[i]);
                self(self, i + 1);
                chosen.pop_back();
            }
        };
        choose(choose, 0);

        LabelSeq labels(n, 0);
        while (true) {
            for (const auto& edges : edge_sets) {
                push(Template(labels, edges));
            }
            // odometer over labels
            std::size_t pos = n;
            while (pos > 0) {
                --pos;
                if (++labels[pos] < alphabet_size) {
                    break;
                }
                labels[pos] = 0;
                if (pos == 0) {
                    pos = n + 1;
                    break;
                }
            }
            if (pos == n + 1) {
                break;
            }
        }
    }
    return out;
}

} // namespace meetpat
