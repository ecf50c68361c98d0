#include "search_space.hpp"

#include <cmath>
#include <set>

namespace hemtfit {

SearchSpace::SearchSpace(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
    if (specs_.empty()) throw std::invalid_argument("search space needs at least one parameter");
    std::set<std::string> seen;
    for (const auto& s : specs_) {
        if (s.name.empty()) throw std::invalid_argument("parameter with empty name");
        if (!seen.insert(s.name).second)
            throw std::invalid_argument("duplicate parameter name '" + s.name + "'");
        if (!(s.lower < s.upper))
            throw std::invalid_argument("parameter '" + s.name + "': lower must be < upper");
        if (s.scale == Scale::Log10 && !(s.lower > 0.0))
            throw std::invalid_argument("parameter '" + s.name + "': log scale needs lower > 0");
        if (!std::isfinite(s.lower) || !std::isfinite(s.upper))
            throw std::invalid_argument("parameter '" + s.name + "': bounds must be finite");
    }
}

double SearchSpace::to_internal(std::size_t dim, double x) const {
    return specs_[dim].scale == Scale::Log10 ? std::log10(x) : x;
}

double SearchSpace::to_external(std::size_t dim, double u) const {
    return specs_[dim].scale == Scale::Log10 ? std::pow(10.0, u) : u;
}

std::vector<double> SearchSpace::to_internal(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = to_internal(i, x[i]);
    return out;
}

std::vector<double> SearchSpace::to_external(const std::vector<double>& u) const {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = to_external(i, u[i]);
    return out;
}

double SearchSpace::internal_lower(std::size_t dim) const {
    return to_internal(dim, specs_[dim].lower);
}

double SearchSpace::internal_upper(std::size_t dim) const {
    return to_internal(dim, specs_[dim].upper);
}

bool SearchSpace::contains_external(const std::vector<double>& x) const {
    if (x.size() != specs_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        // Allow a whisker of slack for values that went through a
        // log10/pow round trip at the bound itself.
        const double w = (specs_[i].upper - specs_[i].lower) * 1e-12;
        if (x[i] < specs_[i].lower - w || x[i] > specs_[i].upper + w) return false;
    }
    return true;
}

} // namespace hemtfit
