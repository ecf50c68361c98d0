#include "twoport.hpp"

#include <cmath>

namespace hemtfit::device {

void SmallSignalParams::validate() const {
    const double vals[] = {gm, tau, gds, cgs, cgd, cds, ri, rg, rd, rs, lg, ld, ls, cpg, cpd};
    for (double v : vals)
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("small-signal parameters must be finite and >= 0");
}

namespace {

TwoPortMatrix invert(const TwoPortMatrix& a, TwoPortRep out_rep) {
    const Complex d = a.det();
    if (std::abs(d) == 0.0) throw EvalFailure("singular two-port matrix");
    TwoPortMatrix r;
    r.m11 = a.m22 / d;
    r.m12 = -a.m12 / d;
    r.m21 = -a.m21 / d;
    r.m22 = a.m11 / d;
    r.rep = out_rep;
    r.z0 = a.z0;
    return r;
}

} // namespace

TwoPortMatrix intrinsic_y(const SmallSignalParams& p, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
    p.validate();
    const Complex jw(0.0, omega);
    const Complex gate_denom = 1.0 + jw * (p.ri * p.cgs);
    const Complex ygs = jw * p.cgs / gate_denom;
    const Complex ygd = jw * p.cgd;
    const Complex gm_del = p.gm * std::exp(Complex(0.0, -omega * p.tau)) / gate_denom;

    TwoPortMatrix y;
    y.rep = TwoPortRep::Y;
    y.m11 = ygs + ygd;
    y.m12 = -ygd;
    y.m21 = gm_del - ygd;
    y.m22 = p.gds + jw * p.cds + ygd;
    return y;
}

TwoPortMatrix embed_extrinsics(const TwoPortMatrix& y_int, const SmallSignalParams& p,
                               double omega) {
    if (y_int.rep != TwoPortRep::Y) throw std::invalid_argument("expected a Y matrix");
    const Complex jw(0.0, omega);
    const Complex zg = p.rg + jw * p.lg;
    const Complex zd = p.rd + jw * p.ld;
    const Complex zs = p.rs + jw * p.ls;

    TwoPortMatrix y = y_int;
    const bool has_series = std::abs(zg) != 0.0 || std::abs(zd) != 0.0 || std::abs(zs) != 0.0;
    if (has_series) {
        TwoPortMatrix z = invert(y_int, TwoPortRep::Z);
        z.m11 += zg + zs;
        z.m12 += zs;
        z.m21 += zs;
        z.m22 += zd + zs;
        y = invert(z, TwoPortRep::Y);
    }
    y.m11 += jw * p.cpg;
    y.m22 += jw * p.cpd;
    return y;
}

TwoPortMatrix y_to_s(const TwoPortMatrix& y, double z0) {
    if (y.rep != TwoPortRep::Y) throw std::invalid_argument("expected a Y matrix");
    if (!(z0 > 0.0)) throw std::invalid_argument("z0 must be > 0");
    // A = I + z0*Y, S = (I - z0*Y) * A^-1
    TwoPortMatrix a;
    a.m11 = 1.0 + z0 * y.m11;
    a.m12 = z0 * y.m12;
    a.m21 = z0 * y.m21;
    a.m22 = 1.0 + z0 * y.m22;
    const Complex d = a.det();
    if (std::abs(d) == 0.0) throw EvalFailure("singular (I + z0*Y)");

    TwoPortMatrix b;
    b.m11 = 1.0 - z0 * y.m11;
    b.m12 = -z0 * y.m12;
    b.m21 = -z0 * y.m21;
    b.m22 = 1.0 - z0 * y.m22;

    TwoPortMatrix s;
    s.rep = TwoPortRep::S;
    s.z0 = z0;
    s.m11 = (b.m11 * a.m22 - b.m12 * a.m21) / d;
    s.m12 = (b.m12 * a.m11 - b.m11 * a.m12) / d;
    s.m21 = (b.m21 * a.m22 - b.m22 * a.m21) / d;
    s.m22 = (b.m22 * a.m11 - b.m21 * a.m12) / d;
    return s;
}

TwoPortMatrix s_to_y(const TwoPortMatrix& s) {
    if (s.rep != TwoPortRep::S) throw std::invalid_argument("expected an S matrix");
    // z0*Y = (I + S)^-1 (I - S)
    TwoPortMatrix a;
    a.m11 = 1.0 + s.m11;
    a.m12 = s.m12;
    a.m21 = s.m21;
    a.m22 = 1.0 + s.m22;
    const Complex d = a.det();
    if (std::abs(d) == 0.0) throw EvalFailure("singular (I + S)");

    TwoPortMatrix b;
    b.m11 = 1.0 - s.m11;
    b.m12 = -s.m12;
    b.m21 = -s.m21;
    b.m22 = 1.0 - s.m22;

    TwoPortMatrix y;
    y.rep = TwoPortRep::Y;
    y.z0 = s.z0;
    y.m11 = (a.m22 * b.m11 - a.m12 * b.m21) / (d * s.z0);
    y.m12 = (a.m22 * b.m12 - a.m12 * b.m22) / (d * s.z0);
    y.m21 = (a.m11 * b.m21 - a.m21 * b.m11) / (d * s.z0);
    y.m22 = (a.m11 * b.m22 - a.m21 * b.m12) / (d * s.z0);
    return y;
}

SParamDataset s_params(const SmallSignalParams& p, const std::vector<double>& freqs_hz,
                       double z0) {
    if (freqs_hz.empty()) throw std::invalid_argument("frequency list must be nonempty");
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        if (!(freqs_hz[i] > 0.0)) throw std::invalid_argument("frequencies must be > 0");
        if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1]))
            throw std::invalid_argument("frequencies must be strictly ascending");
    }
    SParamDataset ds;
    ds.entries.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        const double omega = 2.0 * M_PI * f;
        const TwoPortMatrix s = y_to_s(embed_extrinsics(intrinsic_y(p, omega), p, omega), z0);
        SParamEntry e;
        e.freq_hz = f;
        e.s[kS11] = s.m11;
        e.s[kS21] = s.m21;
        e.s[kS12] = s.m12;
        e.s[kS22] = s.m22;
        e.mask = kMaskAll;
        ds.entries.push_back(e);
    }
    return ds;
}

double max_singular_value(const TwoPortMatrix& m) {
    // Largest eigenvalue of M^H M, closed form for the 2x2 Hermitian case.
    const double a = std::norm(m.m11) + std::norm(m.m21);
    const double d = std::norm(m.m12) + std::norm(m.m22);
    const Complex b = std::conj(m.m11) * m.m12 + std::conj(m.m21) * m.m22;
    const double tr = a + d;
    const double det = a * d - std::norm(b);
    const double disc = std::max(tr * tr - 4.0 * det, 0.0);
    return std::sqrt(0.5 * (tr + std::sqrt(disc)));
}

} // namespace hemtfit::device
