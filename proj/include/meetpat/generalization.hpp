#ifndef meetpat_generalization_hpp
#define meetpat_generalization_hpp

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "meetpat/template.hpp"

namespace meetpat {

using uint128 = unsigned __int128;

std::string to_string(uint128 value);

/*
 * Size of the template class with at most L nodes and at most B backward
 * arrows over an alphabet of `alphabet_size` labels, counted as
 *
 *   sum_{n=0}^{L} |A|^n * sum_{b=0}^{min(B,n)} C(n(n-1)/2, b)
 *
 * The n = 0 term is the empty template. C(a, b) = 0 when b > a.
 */
struct TemplateCount {
    std::optional<uint128> exact;   // set when the count fits the integer budget
    double log_count = 0.0;         // natural log, always set
};

/// Natural log of the class size, via log-sum-exp over log-gamma binomials.
double log_count_templates(std::size_t L, std::size_t B, std::size_t alphabet_size);

/// Exact class size, or nullopt when any intermediate reaches 2^budget_bits.
std::optional<uint128> exact_count_templates(std::size_t L, std::size_t B,
                                             std::size_t alphabet_size,
                                             unsigned budget_bits = 128);

TemplateCount count_templates(std::size_t L, std::size_t B, std::size_t alphabet_size,
                              unsigned budget_bits = 128);

struct BoundInputs {
    double r_emp = 0.0;
    std::size_t m = 1;
    std::size_t L = 0;
    std::size_t B = 0;
    std::size_t alphabet_size = 1;
    double delta = 0.05;
    double loss_scale = 1.0;   // width of the loss range fed to Hoeffding
};

/// r_emp + loss_scale * sqrt((log_count + log(1/delta)) / (2m)).
double risk_bound(const BoundInputs& inputs);

inline constexpr std::size_t kDefaultTemplateCap = 1'000'000;

/// Every nonempty template with at most L nodes and at most B back edges.
/// The empty template is not included. Refuses past `cap` templates.
std::vector<Template> enumerate_templates(std::size_t L, std::size_t B, std::size_t alphabet_size,
                                          std::size_t cap = kDefaultTemplateCap);

} // namespace meetpat

#endif
