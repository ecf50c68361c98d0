#ifndef HEMTFIT_SEARCH_SPACE_HPP
#define HEMTFIT_SEARCH_SPACE_HPP

#include <string>
#include <vector>

#include "common.hpp"

namespace hemtfit {

enum class Scale { Linear, Log10 };

/// One bounded parameter of the search domain. Log-scaled parameters
/// must have strictly positive bounds; the optimizer then works on
/// log10 coordinates for that dimension.
struct ParamSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    Scale scale = Scale::Linear;
};

/// The hard-bounded parameter domain. Immutable after construction;
/// validates name uniqueness and bound ordering.
class SearchSpace {
  public:
    explicit SearchSpace(std::vector<ParamSpec> specs);

    std::size_t size() const { return specs_.size(); }
    const ParamSpec& operator[](std::size_t i) const { return specs_[i]; }
    const std::vector<ParamSpec>& specs() const { return specs_; }

    /// Internal (optimizer) coordinate of one external value:
    /// identity for linear dimensions, log10 for log dimensions.
    double to_internal(std::size_t dim, double x) const;
    double to_external(std::size_t dim, double u) const;
    std::vector<double> to_internal(const std::vector<double>& x) const;
    std::vector<double> to_external(const std::vector<double>& u) const;

    double internal_lower(std::size_t dim) const;
    double internal_upper(std::size_t dim) const;

    bool contains_external(const std::vector<double>& x) const;

  private:
    std::vector<ParamSpec> specs_;
};

} // namespace hemtfit

#endif
