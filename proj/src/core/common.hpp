#ifndef HEMTFIT_COMMON_HPP
#define HEMTFIT_COMMON_HPP

#include <charconv>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hemtfit {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (tables, netlists, config files). Carries a line
// number when one is known (0 = unknown).
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_no(line) {}
    std::size_t line_no;
};

// A model evaluation that could not produce a result (non-convergent
// solve, singular matrix, failed external process). Mapped to a +inf
// loss by the optimizer, never fatal to a run.
struct EvalFailure : Error {
    using Error::Error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Locale-independent double formatting. Shortest form that round-trips.
std::string fmt_double(double v);
// Scientific notation with 9 significant digits (netlist fields).
std::string fmt_double_sci9(double v);
// Locale-independent strtod replacement; accepts inf/nan and the
// typographic minus U+2212. Throws ParseError on trailing garbage.
double parse_double(const std::string& text);

// Deterministic random stream. All stochastic choices in the optimizer
// draw from one of these, sequentially, so a seed pins the whole run.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double next_double();
    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi);
    // Standard normal via Box-Muller (two draws per pair, cached).
    double next_normal();
    // Uniform integer in [0, n).
    std::size_t next_index(std::size_t n);

  private:
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

} // namespace hemtfit

#endif
