#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rotsol/types.hpp"

namespace rotsol {

class AuxProfile;
class ExtendedHamiltonian;

/// A vector field xi with L_xi omega = omega near the energy surface, its flow phi^s, and the
/// half-width delta of the shell neighbourhood it foliates.
struct DilationSpec {
  std::string name;
  int np = 1;  ///< momentum dimension 2n - l
  std::function<PointVec(const PointVec&)> xi;
  std::optional<std::function<PointVec(double, const PointVec&)>> closed_form_flow;
  double delta = 0.3;

  bool is_standard() const { return name == "standard"; }
};

/// xi(p, q) = (p, 0) with flow phi^s(p, q) = (e^s p, q).
DilationSpec standard_dilation(int np, double delta = 0.3);

/// phi^s(x) by the closed form when present, otherwise by integrating the flow ODE.
PointVec dilation_flow(const DilationSpec& spec, double s, const PointVec& x);

/// Integrates d/ds Phi = xi(Phi) with local tolerance 1e-11, ignoring any closed form.
/// Throws InputError for |s| >= delta.
PointVec integrate_dilation(const DilationSpec& spec, double s, const PointVec& x);

/// max over samples of || (D phi^s)^T J (D phi^s) - e^s J ||_F with central-difference Jacobians.
double verify_conformal(const DilationSpec& spec, double s, const std::vector<PointVec>& samples);

/// Time-sampled trajectory on a uniform grid t_j = t0 + j dt.
struct SampledOrbit {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<PointVec> states;
};

struct TransportResult {
  SampledOrbit orbit;
  double factor = 1.0;    ///< e^{s2 - s1} f'(s1) / f'(s2)
  double residual = 0.0;  ///< sup | x2' - factor X_Hhat(x2) | using 4th-order differences
};

/// Moves an X_Hhat orbit lying on shell s1 to shell s2 with phi^{s2 - s1} and checks the
/// rescaled equation of motion. Requires |s1|, |s2| < delta / 3.
TransportResult transport_orbit(const DilationSpec& spec, const ExtendedHamiltonian& hhat, const SampledOrbit& x1,
                                double s1, double s2);

/// max over surface samples of || X_F(x) - (F'(x) . xi(x)) X_Hhat(x) ||.
double field_ratio_check(const std::function<PointVec(const PointVec&)>& field_gradient,
                         const ExtendedHamiltonian& hhat, const DilationSpec& spec,
                         const std::vector<PointVec>& surface_samples);

}  // namespace rotsol
