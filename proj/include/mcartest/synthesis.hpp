#ifndef MCARTEST_SYNTHESIS_HPP
#define MCARTEST_SYNTHESIS_HPP

#include <string>
#include <vector>

#include "mcartest/dataset.hpp"
#include "mcartest/rng.hpp"

namespace mcar {

enum class Margin { exp1, chisq4, uniform };
enum class DistributionKind { std_normal, clayton };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::std_normal;
  double theta = 1.0;            // clayton only
  std::vector<Margin> margins;   // one per column, or one applied to all; clayton only

  Margin margin(std::size_t column) const;
  std::string describe() const;  // e.g. "std_normal", "clayton(1)/exp"
};

enum class MechanismKind { mcar, mar_1_to_x, mar_rank, mar_mean };

struct MeanSplit {
  int control = -1;  // ordinal into the complete columns, -1 = default pairing
  double p_high = 0.0;
  double p_low = 0.0;
};

struct MechanismSpec {
  MechanismKind kind = MechanismKind::mcar;
  double prob = 0.0;           // mcar, mar_1_to_x, mar_rank
  double odds = 9.0;           // mar_1_to_x
  std::vector<int> controls;   // per target: ordinal into the complete columns
  std::vector<MeanSplit> splits;  // mar_mean; empty = default 1X2Y configuration

  std::string describe() const;
  bool has_prob() const { return kind != MechanismKind::mar_mean; }
};

std::string margin_name(Margin m);
Margin parse_margin(const std::string& s);
std::string mechanism_name(MechanismKind k);
MechanismKind parse_mechanism(const std::string& s);

Dataset gen_std_normal(Eigen::Index n, Eigen::Index d, RngStream& rng);
Dataset gen_clayton(Eigen::Index n, Eigen::Index d, const DistributionSpec& spec, RngStream& rng);

// n×(p+q) fully observed sample with columns X1..Xp, Y1..Yq.
struct Generated {
  Dataset data;
  ColumnRoles roles;
};
Generated generate(Eigen::Index n, int p, int q, const DistributionSpec& spec, RngStream& rng);

// Complete column paired with the v-th target: (v mod p), unless overridden.
int control_for(const ColumnRoles& roles, const std::vector<int>& controls, int target);

Dataset apply_mcar(const Dataset& ds, const ColumnRoles& roles, double p, RngStream& rng);

// Cells above the control's median are `odds` times more likely to be masked;
// per-cell Bernoulli at p_high = 2p·x/(x+1), p_low = 2p/(x+1).
Dataset apply_mar_1_to_x(const Dataset& ds, const ColumnRoles& roles, double p, double odds,
                         const std::vector<int>& controls, RngStream& rng);

// Masks exactly round(n·p) cells per target, drawn without replacement with
// weights equal to the ranks of the control column.
Dataset apply_mar_rank(const Dataset& ds, const ColumnRoles& roles, double p,
                       const std::vector<int>& controls, RngStream& rng);

Dataset apply_mar_mean(const Dataset& ds, const ColumnRoles& roles,
                       const std::vector<MeanSplit>& splits, RngStream& rng);

std::vector<MeanSplit> default_mean_splits();

Dataset apply_mechanism(const Dataset& ds, const ColumnRoles& roles, const MechanismSpec& spec,
                        RngStream& rng);

// Throws SpecError on out-of-range probabilities, odds, controls, theta.
void validate(const DistributionSpec& spec);
void validate(const MechanismSpec& spec, int p, int q);

}  // namespace mcar

#endif
