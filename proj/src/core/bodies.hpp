#pragma once

#include "common.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace symcap {

// Combinatorial datum of a product of coordinate balls
//   rho_1 B^{m_1} x ... x rho_k B^{m_k}  in R^{2n},
// coordinates ordered (x_1..x_n, y_1..y_n). Factor l spans e_i for i in I[l]
// and f_j for j in J[l]; indices inside I and J are 1-based.
struct BallProductSpec {
  int n = 0;
  std::vector<double> radii;
  std::vector<std::vector<int>> I;
  std::vector<std::vector<int>> J;

  std::size_t factors() const { return radii.size(); }
  int factor_dim(std::size_t l) const { return static_cast<int>(I[l].size() + J[l].size()); }
  // 0-based ambient coordinates spanned by factor l.
  std::vector<int> coordinates(std::size_t l) const;
  // Throws ValidationError naming the offending index or factor.
  void validate() const;
};

// A convex body described by its support function. Values are immutable and
// cheap to copy; all evaluators are pure and thread-safe.
class SupportBody {
 public:
  using ScalarFn = std::function<double(const Vec&)>;
  using VectorFn = std::function<Vec(const Vec&)>;

  struct Parts {
    int dim = 0;
    ScalarFn support;
    VectorFn gradient;
    ScalarFn distance;  // may be empty
    std::optional<double> volume;
    double radius_bound = 0.0;  // >= max_{k in K} |k|
    std::string label;
    std::optional<BallProductSpec> ball_product;
  };

  explicit SupportBody(Parts parts);

  int dim() const { return parts_->dim; }
  const std::string& label() const { return parts_->label; }

  // h_K(u); u need not be a unit vector (positively 1-homogeneous).
  double support(const Vec& u) const { return parts_->support(u); }
  // Gradient of the 1-homogeneous extension; equals the support point of K in
  // direction z where h is differentiable.
  Vec gradient(const Vec& z) const { return parts_->gradient(z); }

  bool has_distance() const { return static_cast<bool>(parts_->distance); }
  // Euclidean distance from x to K. Throws ValidationError without an oracle.
  double distance(const Vec& x) const;

  const std::optional<double>& volume() const { return parts_->volume; }
  double radius_bound() const { return parts_->radius_bound; }
  const std::optional<BallProductSpec>& ball_product() const { return parts_->ball_product; }

  SupportBody relabeled(std::string label) const;

 private:
  std::shared_ptr<const Parts> parts_;
};

// --- constructors -----------------------------------------------------------

SupportBody ball_product_body(const BallProductSpec& spec);

SupportBody unit_ball(int n);                          // B^{2n}
SupportBody ball(int n, double radius);                // radius * B^{2n}
SupportBody cube(int n);                               // [-1,1]^{2n}
SupportBody ellipsoid(const std::vector<double>& semi_axes);  // diag(a) B^{d}
SupportBody polydisk(const std::vector<double>& radii);        // prod_j r_j B^2 in (x_j,y_j)
// {|x|^p + |y|^p <= r^p} in R^2, p >= 1.
SupportBody superellipse(double p, double r);

// Block-diagonal product: block b is a body living on the 0-based ambient
// coordinates coords[b]; the coordinate sets must partition {0..dim-1}.
struct ProductBlock {
  std::vector<int> coords;
  SupportBody body;
};
SupportBody coordinate_product(int dim, const std::vector<ProductBlock>& blocks, std::string label = {});

// Radius r when k is the centered Euclidean ball rB.
std::optional<double> euclidean_ball_radius(const SupportBody& k);
SupportBody minkowski_sum(const SupportBody& a, const SupportBody& b);
SupportBody scaled(const SupportBody& k, double factor);  // factor > 0
// A K with h_{AK}(u) = h_K(A^T u). Throws ValidationError for singular A.
SupportBody linear_image(const SupportBody& k, const Mat& a);

// Standard spec builders.
BallProductSpec lagrangian_bidisk_spec();                 // P_L in R^4
BallProductSpec square_spec(double rho = 1.0);            // rho * [-1,1]^2
BallProductSpec segments_spec(double rho_e, double rho_f);  // rho_e B^1(e_1) x rho_f B^1(f_1)
BallProductSpec square_times_disk_spec();                 // [-1,1]^2 (x1,y1) x B^2 (x2,y2)

// --- combinatorial predicates -----------------------------------------------

// I_l ∩ J_l' != ∅  =>  m_l = m_l' and rho_l = rho_l'  for all l, l'.
bool cond_check(const BallProductSpec& spec);

struct FactorClassification {
  std::vector<bool> symplectic;  // factor l symplectic iff I_l = J_l
  bool toric = false;            // all factors symplectic
  bool test_family = false;      // cond_check && some nonsymplectic factor
};
FactorClassification classify_factors(const BallProductSpec& spec);

// Volume of the unit ball in R^d.
double ball_volume(int d);

// Named catalog used by the experiment suites.
struct CatalogEntry {
  std::string grammar;
  SupportBody body;
};
std::vector<CatalogEntry> standard_bodies();

}  // namespace symcap
