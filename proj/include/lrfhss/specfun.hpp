#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lrfhss::specfun {

/// Truncation policy shared by every infinite series in the library.
///
/// When `fixed_terms` is set the series is summed over exactly that many
/// terms and the tolerance is ignored. Otherwise summation stops once the
/// latest term is below `rel_tolerance` times the running sum, and a
/// SeriesError is raised if that never happens within `max_terms`.
struct SeriesControl {
    double rel_tolerance = 1e-10;
    std::size_t max_terms = 10000;
    std::optional<std::size_t> fixed_terms;

    void validate() const;

    static SeriesControl defaults() { return {}; }
    /// Ten-term truncation used for the published analytical curves.
    static SeriesControl paper_mode() { return {1e-10, 10000, 10}; }
    static SeriesControl fixed(std::size_t terms) { return {1e-10, terms, terms}; }
};

bool operator==(const SeriesControl& a, const SeriesControl& b);

struct SeriesResult {
    double value = 0.0;
    std::size_t terms = 0;
};

class SeriesError : public std::runtime_error {
public:
    explicit SeriesError(const std::string& what) : std::runtime_error(what) {}
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Rising factorial a (a+1) ... (a+n-1); 1 for n = 0.
double pochhammer(double a, std::size_t n);

/// Unnormalized lower incomplete gamma, integral of e^-t t^(a-1) over [0, x].
double lower_incomplete_gamma(double a, double x);

/// Regularized P(a, x) = lower_incomplete_gamma(a, x) / Gamma(a).
/// Series for x < a + 1, Lentz continued fraction otherwise.
double regularized_lower_gamma(double a, double x);

/// Confluent hypergeometric 1F1(a; b; x) by direct power series.
SeriesResult kummer_1f1(double a, double b, double x,
                        const SeriesControl& ctl = SeriesControl::defaults());

/// log 1F1(a; b; x) for a, b > 0 and x >= 0, summed term by term in log
/// space so it stays finite where 1F1 itself overflows.
double log_kummer_1f1(double a, double b, double x, const SeriesControl& ctl = SeriesControl::defaults());

/// Gauss hypergeometric 2F1(a, b; c; x) for |x| < 1 by direct power series.
SeriesResult gauss_2f1(double a, double b, double c, double x,
                       const SeriesControl& ctl = SeriesControl::defaults());

/// log 2F1(a, b; c; x) for a, b, c > 0 and 0 <= x < 1 (all terms positive).
double log_gauss_2f1(double a, double b, double c, double x,
                     const SeriesControl& ctl = SeriesControl::defaults());

}  // namespace lrfhss::specfun
