#ifndef HEMTFIT_TWOPORT_HPP
#define HEMTFIT_TWOPORT_HPP

#include <vector>

#include "datasets.hpp"

namespace hemtfit::device {

/// Small-signal model: intrinsic transistor core plus the extrinsic
/// pad/lead parasitic network surrounding it.
struct SmallSignalParams {
    // intrinsic
    double gm = 0.0;  // S
    double tau = 0.0; // s, transconductance delay
    double gds = 0.0; // S
    double cgs = 0.0; // F
    double cgd = 0.0; // F
    double cds = 0.0; // F
    double ri = 0.0;  // ohm, gate charging resistance
    // extrinsic
    double rg = 0.0, rd = 0.0, rs = 0.0; // ohm
    double lg = 0.0, ld = 0.0, ls = 0.0; // H
    double cpg = 0.0, cpd = 0.0;         // F

    void validate() const; // all nonnegative
};

enum class TwoPortRep { Y, Z, S };

/// 2x2 complex two-port matrix, tagged with its representation.
/// The reference impedance only applies to S matrices.
struct TwoPortMatrix {
    Complex m11, m12, m21, m22;
    TwoPortRep rep = TwoPortRep::Y;
    double z0 = 50.0;

    Complex det() const { return m11 * m22 - m12 * m21; }
};

inline constexpr double kDefaultZ0 = 50.0;

/// Intrinsic Y-matrix at omega (rad/s): Ri-Cgs gate branch with a
/// delayed transconductance, Cgd feedback, gds & Cds at the output.
TwoPortMatrix intrinsic_y(const SmallSignalParams& p, double omega);

/// Wraps an intrinsic Y-matrix with the extrinsic network: series
/// R+jwL at gate/drain/source via a Z detour, then the pad shunts
/// jwCPG / jwCPD back in Y. Throws EvalFailure when the intrinsic
/// matrix is singular and a series element forces the conversion.
TwoPortMatrix embed_extrinsics(const TwoPortMatrix& y_int, const SmallSignalParams& p,
                               double omega);

/// S = (I - z0 Y)(I + z0 Y)^-1. Throws EvalFailure when I + z0 Y is
/// singular.
TwoPortMatrix y_to_s(const TwoPortMatrix& y, double z0 = kDefaultZ0);
/// Inverse of y_to_s.
TwoPortMatrix s_to_y(const TwoPortMatrix& s);

/// Full sweep: intrinsic -> embed -> S per frequency, ascending.
SParamDataset s_params(const SmallSignalParams& p, const std::vector<double>& freqs_hz,
                       double z0 = kDefaultZ0);

/// Largest singular value of a 2x2 complex matrix (passivity checks).
double max_singular_value(const TwoPortMatrix& m);

} // namespace hemtfit::device

#endif
