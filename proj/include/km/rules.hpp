#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "km/types.hpp"

namespace km {

// a(i,j) = 1 iff supp(psi_j) is a subset of supp(psi_i), i != j; the
// diagonal stays 0.  Indices are the model's dense item indices.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(int n) : n_(n), bits_(size_t(n) * n, 0) {}
  int n() const { return n_; }
  bool at(int i, int j) const { return bits_[size_t(i) * n_ + j] != 0; }
  void set(int i, int j, bool v) { bits_[size_t(i) * n_ + j] = v ? 1 : 0; }
  long nnz() const;

 private:
  int n_;
  std::vector<std::uint8_t> bits_;
};

struct Rule {
  std::int64_t if_item;    // antecedent, external id
  std::int64_t then_item;  // consequent, external id
  bool likes;  // true: "likes if => likes then"; false: the contrapositive
               // "dislikes then => dislikes if"
};

struct RuleReport {
  AdjacencyMatrix adjacency{0};
  std::vector<double> beta;               // influence score per dense item
  std::vector<std::int64_t> maximal_set;  // external ids, ascending
  std::vector<Rule> rules;                // filtered by beta >= min_beta
  double min_beta = 0.0;
};

// supp(inner) subset-of supp(outer)?
bool support_included(const IndicatorVector& inner,
                      const IndicatorVector& outer);

AdjacencyMatrix build_adjacency(const std::vector<IndicatorVector>& psi);

// beta_i = (1/|I|) sum_{j != i} a(i,j): the fraction of other items whose
// event set item i's answer determines.
std::vector<double> influence_scores(const AdjacencyMatrix& a);

// items whose indicator is all-ones: answering them determines every other
// item's answer
std::vector<int> maximal_set(const std::vector<IndicatorVector>& psi);

// Deterministic rules of the learned model.  For every edge a(i,j) = 1 the
// model implies "u likes i => u likes j" and "u dislikes j => u dislikes i";
// both are emitted when beta_i >= min_beta.  The adjacency, scores and
// maximal set are always complete regardless of the filter.
RuleReport mine_rules(const KolmogorovModel& m, double min_beta = 0.5);

// Report schema:
//   {"adjacency_nnz": [[i, j], ...],       // external ids, a(i,j) = 1
//    "beta": {"<item id>": 0.25, ...},
//    "maximal_set": [ids...],
//    "min_beta": 0.5,
//    "rules": [{"if": i, "then": j, "direction": "likes"|"dislikes"}, ...]}
// For "dislikes" rules, "if"/"then" carry the antecedent/consequent of the
// contrapositive reading, i.e. {"if": j, "then": i, "direction": "dislikes"}.
std::string rule_report_to_json(const RuleReport& r,
                                const KolmogorovModel& m);

void save_rule_report(const RuleReport& r, const KolmogorovModel& m,
                      const std::string& path);

}  // namespace km
