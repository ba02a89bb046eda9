#ifndef WGM_DTN_HPP
#define WGM_DTN_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgm/fem.hpp"
#include "wgm/modes.hpp"
#include "wgm/types.hpp"

namespace wgm
{

struct DtnModeInfo
{
  Complex beta;
  Complex beta_sq;
  ModeClass classification = ModeClass::Complex;
};

struct DtnCluster
{
  std::vector<int> members;  // indices into DtnMatrix::modes
  MatrixXcd gram;
};

// Modal Dirichlet-to-Neumann operator on the free edge dofs of the cross-section:
//   load = N t,  N = sum_K W_K diag(c_K) G_K^-1 W_K^H,  c_j = sign * i / beta_j,
// where the columns of W are w_j = (C - w^2 Me) u_j and G_K is the Gram matrix of cluster K.
struct DtnMatrix
{
  double omega = 0.0;
  int sign = 1;
  std::string fingerprint;  // mesh fingerprint (16 hex digits), empty if unknown
  std::vector<std::pair<std::string, std::string>> params;  // creation parameters
  std::vector<DtnModeInfo> modes;
  std::vector<DtnCluster> clusters;
  MatrixXcd W;        // n_e x modes
  VectorXcd factors;  // c_j
  MatrixXcd N;        // n_e x n_e

  int num_edge_dofs() const { return static_cast<int>(N.rows()); }
  int num_modes() const { return static_cast<int>(modes.size()); }
  std::string param(const std::string &key) const;  // empty when absent
};

// Coefficients of the trace in the modal basis: a_j = a_orth(trace, u_j) for singletons and
// G_K a_K = m_K on clusters. Throws on degenerate clusters unless skip_degenerate, in which case
// their coefficients are NaN.
VectorXcd expansion_coeffs(const PencilBlocks &blocks, double omega,
                           const std::vector<Mode> &modes,
                           const std::vector<ModeCluster> &clusters, const VectorXcd &trace,
                           bool skip_degenerate = false);

struct EnergyTest
{
  int sign = 1;
  std::string basis;  // "propagating" or "default"
  int votes = 0;
};

// Picks the sign s of c_j = s i / beta_j. For a real-vector mode with g = a_orth(u, u) the
// pairing u^H N u equals s i g / beta, so the outgoing power -Im(u^H N u) / (2 w) of every
// propagating mode fixes s. Conflicting votes throw. Without propagating modes s = +1 ("default").
EnergyTest outgoing_sign(const std::vector<Mode> &modes, const std::vector<ModeCluster> &clusters);

struct DtnOptions
{
  int sign = 0;  // 0: decided by outgoing_sign
  bool skip_degenerate = false;
  std::string fingerprint;
  std::vector<std::pair<std::string, std::string>> params;
};

DtnMatrix build_dtn(const PencilBlocks &blocks, double omega, const std::vector<Mode> &modes,
                    const std::vector<ModeCluster> &clusters, const DtnOptions &opts = {});

VectorXcd apply_dtn(const DtnMatrix &dtn, const VectorXcd &trace);

// N rebuilt from the factored form using only clusters whose members all lie among the first
// `count` modes.
MatrixXcd dtn_from_factors(const DtnMatrix &dtn, int count);

// ||N - N_m||_F / ||N||_F with N_m built from the first ceil(fraction * M) modes.
double truncation_indicator(const DtnMatrix &dtn, double fraction = 0.6);

// WGDTN1 text format:
//   WGDTN1
//   omega <w>
//   n_e <n>
//   modes <m>
//   sign <+1|-1>
//   fingerprint <hex|->
//   units c=1 lengths=dimensionless
//   param <key> <value>                  (any number)
//   betas
//   <j> <re b> <im b> <re b^2> <im b^2> <class>     (m lines)
//   matrix <dense|omitted>
//   <re> <im>                            (n_e^2 lines, row-major, when dense)
//   factored
//   W
//   <re> <im>                            (n_e m lines, row-major)
//   factors
//   <re> <im>                            (m lines)
//   clusters <k>
//   cluster <size> <member>...           then size^2 Gram lines <re> <im>, row-major
//   end
// Reals are written with 17 significant digits so a round trip is exact.
std::string serialize_dtn(const DtnMatrix &dtn, bool dense = true);
DtnMatrix parse_dtn(std::string_view text);

void export_dtn(const DtnMatrix &dtn, const std::filesystem::path &path, bool dense = true);
DtnMatrix import_dtn(const std::filesystem::path &path,
                     const std::optional<std::string> &expected_fingerprint = std::nullopt);

}  // namespace wgm

#endif  // WGM_DTN_HPP
