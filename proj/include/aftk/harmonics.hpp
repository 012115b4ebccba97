#ifndef AFTK_HARMONICS_HPP
#define AFTK_HARMONICS_HPP

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "aftk/jets.hpp"

namespace aftk {

// mean-value coefficient of the constant eigenfunction, 1/(2*sqrt(pi))
inline constexpr double kA0 = 0.28209479177387814347;

// Real orthonormal eigenfunction basis on the unit sphere, truncated at
// degree lmax, together with a quadrature grid that integrates products of
// basis functions exactly: Gauss-Legendre nodes in cos(theta1) crossed with
// a uniform azimuthal grid.  Mode order is degree-major, order-minor:
// n = l^2 + l + m with m running -l..l, so eigenvalues -l(l+1) appear in
// nonincreasing order.
class HarmonicBasis {
 public:
  explicit HarmonicBasis(int lmax);

  int lmax() const { return lmax_; }
  int size() const { return (lmax_ + 1) * (lmax_ + 1); }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int n_nodes() const { return n_theta_ * n_phi_; }

  int node(int itheta, int jphi) const { return itheta * n_phi_ + jphi; }
  double theta(int itheta) const { return theta_[itheta]; }
  double phi(int jphi) const { return phi_[jphi]; }
  double node_theta(int node) const { return theta_[node / n_phi_]; }
  double node_phi(int node) const { return phi_[node % n_phi_]; }
  Eigen::Vector3d node_unit(int node) const;

  // quadrature weights against the round measure; they sum to 4*pi
  const Eigen::VectorXd& weights() const { return weights_; }

  static int mode_index(int l, int m) { return l * l + l + m; }
  int mode_l(int n) const { return mode_l_[n]; }
  int mode_m(int n) const { return mode_m_[n]; }
  // Laplace-Beltrami eigenvalue of mode n, -l(l+1)
  double eigenvalue(int n) const {
    const double l = mode_l_[n];
    return -l * (l + 1.0);
  }

  // basis values at the grid, size() x n_nodes()
  const Eigen::MatrixXd& values() const { return values_; }
  // chart derivatives at the grid (same layout); built on first use
  const Eigen::MatrixXd& dtheta() const;
  const Eigen::MatrixXd& dphi() const;
  const Eigen::MatrixXd& dtheta2() const;
  const Eigen::MatrixXd& dthetaphi() const;
  const Eigen::MatrixXd& dphi2() const;

  // values of all basis functions at an arbitrary unit vector
  void eval_values(const Eigen::Vector3d& u, Eigen::VectorXd& out) const;
  // polynomial jets of the degree-l homogeneous representatives at u;
  // combined with the chain rule through x/|x| these give pole-free
  // Cartesian derivatives of functions on the sphere
  void eval_jets(const Eigen::Vector3d& u, std::vector<Jet2>& out) const;

 private:
  void build_chart_tables() const;

  int lmax_;
  int n_theta_;
  int n_phi_;
  std::vector<double> theta_;
  std::vector<double> phi_;
  Eigen::VectorXd weights_;
  std::vector<int> mode_l_;
  std::vector<int> mode_m_;
  Eigen::MatrixXd values_;
  mutable bool chart_built_ = false;
  mutable Eigen::MatrixXd dtheta_, dphi_, dtheta2_, dthetaphi_, dphi2_;
};

// value, gradient and Hessian of the degree-zero homogeneous extension
// f(x) = f(x/|x|) at a point away from the origin
struct AngularJet {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
};

class SphereFunction {
 public:
  SphereFunction() = default;
  SphereFunction(std::shared_ptr<const HarmonicBasis> basis,
                 Eigen::VectorXd coefficients);

  const std::shared_ptr<const HarmonicBasis>& basis() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coeff_; }
  Eigen::VectorXd& coefficients() { return coeff_; }

  double mean() const { return coeff_.size() ? coeff_[0] * kA0 : 0.0; }
  // L2 norm over the sphere, i.e. the coefficient 2-norm
  double norm() const { return coeff_.norm(); }
  // Sobolev norm with spectral weight (1 + l(l+1))^(m/2)
  double sobolev_norm(int m) const;

  double eval(const Eigen::Vector3d& u) const;
  AngularJet eval_cartesian(const Eigen::Vector3d& x, int order = 2) const;

  SphereFunction& operator+=(const SphereFunction& o);
  SphereFunction& operator-=(const SphereFunction& o);
  SphereFunction& operator*=(double s);

 private:
  std::shared_ptr<const HarmonicBasis> basis_;
  Eigen::VectorXd coeff_;
};

SphereFunction operator+(SphereFunction a, const SphereFunction& b);
SphereFunction operator-(SphereFunction a, const SphereFunction& b);
SphereFunction operator*(SphereFunction a, double s);

// chain rule from polynomial jets at u = x/|x| (from eval_jets) to the
// Cartesian derivatives of the degree-zero homogeneous extension at x
AngularJet combine_cartesian_jets(const std::vector<Jet2>& jets,
                                  const Eigen::VectorXd& coeff,
                                  const Eigen::Vector3d& x, int order = 2);

// quadrature projection of grid samples onto the basis
SphereFunction analyze(std::shared_ptr<const HarmonicBasis> basis,
                       const Eigen::VectorXd& node_values);
// evaluation of a coefficient vector back on the grid
Eigen::VectorXd synthesize(const SphereFunction& f);
// solve (Laplace-Beltrami) u = f for mean-zero f; the result has zero mean
SphereFunction invert_laplacian(const SphereFunction& f);
// same function on another grid: coefficients are copied where the degrees
// overlap, zero-padded upward, truncated downward
SphereFunction change_basis(const SphereFunction& f,
                            std::shared_ptr<const HarmonicBasis> basis);

// plain-text coefficient files: "lmax L" header then one "l m value" line
// per mode in basis order
void save_coefficients(const SphereFunction& f, const std::string& path);
SphereFunction load_coefficients(
    const std::string& path,
    std::shared_ptr<const HarmonicBasis> basis = nullptr);
void write_coefficient_block(const SphereFunction& f, std::ostream& os);
SphereFunction read_coefficient_block(
    std::istream& is, std::shared_ptr<const HarmonicBasis> basis = nullptr);

namespace detail {
// fixed 17-significant-digit formatting so emitted files are reproducible
std::string format_double(double v);
}  // namespace detail

}  // namespace aftk

#endif
