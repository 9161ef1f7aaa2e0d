#include "km/rules.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "km/errors.hpp"

namespace km {

long AdjacencyMatrix::nnz() const {
  long c = 0;
  for (std::uint8_t b : bits_) c += b;
  return c;
}

bool support_included(const IndicatorVector& inner,
                      const IndicatorVector& outer) {
  if (inner.dim() != outer.dim())
    throw std::invalid_argument("support_included: dimension mismatch");
  for (int d = 0; d < inner.dim(); ++d)
    if (inner.get(d) && !outer.get(d)) return false;
  return true;
}

AdjacencyMatrix build_adjacency(const std::vector<IndicatorVector>& psi) {
  const int n = static_cast<int>(psi.size());
  AdjacencyMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) a.set(i, j, support_included(psi[j], psi[i]));
  return a;
}

std::vector<double> influence_scores(const AdjacencyMatrix& a) {
  const int n = a.n();
  std::vector<double> beta(n, 0.0);
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (int j = 0; j < n; ++j)
      if (j != i && a.at(i, j)) ++count;
    beta[i] = n > 0 ? static_cast<double>(count) / n : 0.0;
  }
  return beta;
}

std::vector<int> maximal_set(const std::vector<IndicatorVector>& psi) {
  std::vector<int> m;
  for (int i = 0; i < static_cast<int>(psi.size()); ++i)
    if (psi[i].is_all_ones()) m.push_back(i);
  return m;
}

RuleReport mine_rules(const KolmogorovModel& m, double min_beta) {
  // values above 1 are allowed and simply filter out every listing
  if (!(min_beta >= 0.0))
    throw std::invalid_argument("mine_rules: min_beta must be >= 0");
  const int n = m.num_items();
  std::vector<IndicatorVector> psi;
  psi.reserve(n);
  for (int i = 0; i < n; ++i) psi.push_back(m.psi(i));

  RuleReport r;
  r.min_beta = min_beta;
  r.adjacency = build_adjacency(psi);
  r.beta = influence_scores(r.adjacency);
  for (int i : maximal_set(psi)) r.maximal_set.push_back(m.items().external(i));
  std::sort(r.maximal_set.begin(), r.maximal_set.end());

  for (int i = 0; i < n; ++i) {
    if (r.beta[i] < min_beta) continue;
    for (int j = 0; j < n; ++j) {
      if (i == j || !r.adjacency.at(i, j)) continue;
      const std::int64_t ei = m.items().external(i);
      const std::int64_t ej = m.items().external(j);
      r.rules.push_back({ei, ej, true});   // likes i => likes j
      r.rules.push_back({ej, ei, false});  // dislikes j => dislikes i
    }
  }
  return r;
}

std::string rule_report_to_json(const RuleReport& r, const KolmogorovModel& m) {
  using nlohmann::json;
  if (r.adjacency.n() != m.num_items())
    throw std::invalid_argument("rule report does not match model");
  json j;
  json nnz = json::array();
  for (int i = 0; i < r.adjacency.n(); ++i)
    for (int k = 0; k < r.adjacency.n(); ++k)
      if (r.adjacency.at(i, k))
        nnz.push_back({m.items().external(i), m.items().external(k)});
  j["adjacency_nnz"] = std::move(nnz);
  json beta = json::object();
  for (int i = 0; i < r.adjacency.n(); ++i)
    beta[std::to_string(m.items().external(i))] = r.beta[i];
  j["beta"] = std::move(beta);
  j["maximal_set"] = r.maximal_set;
  j["min_beta"] = r.min_beta;
  json rules = json::array();
  for (const Rule& rule : r.rules) {
    rules.push_back({{"if", rule.if_item},
                     {"then", rule.then_item},
                     {"direction", rule.likes ? "likes" : "dislikes"}});
  }
  j["rules"] = std::move(rules);
  return j.dump(2) + "\n";
}

void save_rule_report(const RuleReport& r, const KolmogorovModel& m,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << rule_report_to_json(r, m);
  if (!out) throw IoError("write failure: " + path);
}

}  // namespace km
