#include "common.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

namespace hemtfit {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_double_sci9(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 8);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    std::string t = text;
    // Normalize the typographic minus some documents carry.
    static const char kMinus[] = "\xe2\x88\x92"; // U+2212
    for (std::size_t pos; (pos = t.find(kMinus)) != std::string::npos;)
        t.replace(pos, 3, "-");
    // Trim surrounding whitespace.
    const char* ws = " \t\r\n";
    auto b = t.find_first_not_of(ws);
    auto e = t.find_last_not_of(ws);
    if (b == std::string::npos) throw ParseError("empty numeric field");
    t = t.substr(b, e - b + 1);

    // std::from_chars(double) in use here: no locale, strict.
    double out = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec == std::errc() && res.ptr == t.data() + t.size()) return out;
    // from_chars does not accept "inf"/"nan" spellings in all modes; be lenient.
    if (t == "inf" || t == "+inf") return kInf;
    if (t == "-inf") return -kInf;
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("bad numeric field '" + text + "'");
}

namespace {
// splitmix64, used only to spread user seeds over the full state space.
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace

std::uint64_t Rng::next_u64() {
    // xoshiro-free: a 64-bit LCG mixed by splitmix is plenty for sampling
    // and keeps the stream identical across platforms and toolchains.
    return splitmix64(state_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Rng::next_normal() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
}

std::size_t Rng::next_index(std::size_t n) {
    if (n == 0) return 0;
    // Multiply-shift keeps the draw unbiased enough for candidate picking
    // and avoids modulo bias for the small n used here.
    return static_cast<std::size_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
}

} // namespace hemtfit
