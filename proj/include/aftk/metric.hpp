#ifndef AFTK_METRIC_HPP
#define AFTK_METRIC_HPP

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <string>

#include "aftk/harmonics.hpp"

namespace aftk {

// metric data at a point: g, its inverse, first derivatives and Christoffel
// symbols, and optionally second derivatives
struct MetricValue {
  Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d g_inv = Eigen::Matrix3d::Identity();
  // dg[k](i,j) = d_k g_ij
  std::array<Eigen::Matrix3d, 3> dg;
  // christoffel[k](i,j) = Gamma^k_ij
  std::array<Eigen::Matrix3d, 3> christoffel;
  bool has_first = false;
  bool has_second = false;
  // d2g[k][l](i,j) = d_k d_l g_ij
  std::array<std::array<Eigen::Matrix3d, 3>, 3> d2g;
};

// anything that can hand out metric data on the end; radial graphs,
// flux integrals and the CMC solver are generic over this
class MetricEvaluator {
 public:
  virtual ~MetricEvaluator() = default;
  // order 0: g only; 1: + dg, Christoffel; 2: + d2g
  virtual MetricValue eval(const Eigen::Vector3d& x, int order = 1) const = 0;
  virtual double inner_radius() const = 0;
};

using QCallable = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;

// Asymptotically flat metric of the form
//   g_ij(x) = delta_ij + h1_ij(theta)/r + Q_ij(x)
// where h1 lives on the unit sphere and Q is a second-order remainder.
// Angular derivatives are spectral (no finite differences enter the
// Christoffel symbols) except for user-supplied Q callables.
class MetricField final : public MetricEvaluator {
 public:
  enum class QModel { none, schwarzschild_tail, callable };

  // components ordered 11, 12, 13, 22, 23, 33 on a shared basis
  MetricField(std::array<SphereFunction, 6> h1, double inner_radius);

  static MetricField flat(double inner_radius = 10.0);
  // conformal field (1 + 1/r) delta, i.e. h1 = delta with no remainder
  static MetricField conformal(double inner_radius = 10.0);
  // isotropic form (1 + m/2s)^4 delta around an optional center; the exact
  // r^-2 tail goes into Q so h1 is exactly 2 m delta
  static MetricField schwarzschild(double mass,
                                   const Eigen::Vector3d& center =
                                       Eigen::Vector3d::Zero(),
                                   double inner_radius = 10.0);

  // attach remainders; the callable must accept points slightly inside the
  // inner radius because its derivatives are taken by finite differences
  void set_q_schwarzschild_tail(double mass, const Eigen::Vector3d& center);
  void set_q_callable(QCallable q);

  MetricValue eval(const Eigen::Vector3d& x, int order = 1) const override;
  double inner_radius() const override { return inner_radius_; }

  static int component_index(int i, int j);
  const SphereFunction& h1(int i, int j) const {
    return h1_[component_index(i, j)];
  }
  const std::shared_ptr<const HarmonicBasis>& h1_basis() const {
    return h1_[0].basis();
  }
  QModel q_model() const { return q_model_; }

  void save(const std::string& path) const;
  static MetricField load(const std::string& path);

 private:
  void check_positive_definite() const;
  Eigen::Matrix3d q_value(const Eigen::Vector3d& x) const;
  void add_q(const Eigen::Vector3d& x, int order, MetricValue& mv) const;

  std::array<SphereFunction, 6> h1_;
  double inner_radius_;
  QModel q_model_ = QModel::none;
  double q_mass_ = 0.0;
  Eigen::Vector3d q_center_ = Eigen::Vector3d::Zero();
  QCallable q_callable_;
};

// Gamma^k_ij assembled from the inverse metric and first derivatives
std::array<Eigen::Matrix3d, 3> christoffel_symbols(
    const Eigen::Matrix3d& g_inv, const std::array<Eigen::Matrix3d, 3>& dg);

// derived curvature quantities; ricci and scalar need second derivatives
Eigen::Matrix3d ricci_tensor(const MetricValue& mv);
double scalar_curvature(const MetricValue& mv);
double scalar_curvature(const MetricEvaluator& field, const Eigen::Vector3d& x);

// Delta_g x^k = -g^mn Gamma^k_mn, returned for all three coordinates
Eigen::Vector3d coordinate_laplacian(const MetricEvaluator& field,
                                     const Eigen::Vector3d& x);

// "builtin:flat", "builtin:conformal", "builtin:schwarzschild,m=1[,cx=..]",
// optionally ",rin=.." on any builtin; anything else is a metric file path
MetricField parse_metric_spec(const std::string& spec);

}  // namespace aftk

#endif
