#pragma once

#include <string>
#include <vector>

#include "auction/errors.hpp"
#include "auction/random.hpp"
#include "auction/types.hpp"

namespace auction {

// Global type ordinals are agent-major: agent 1's types first, then agent 2's,
// and so on.  Agents are numbered from 1; ordinals from 0.
class TypeUniverse {
 public:
  TypeUniverse() = default;

  explicit TypeUniverse(std::vector<std::vector<std::string>> labels) : labels_(std::move(labels)) {
    first_.assign(1, 0);
    for (std::size_t a = 0; a < labels_.size(); ++a) {
      if (labels_[a].empty()) throw StructuralError("agent " + std::to_string(a + 1) + " has no types");
      for (std::size_t i = 0; i < labels_[a].size(); ++i)
        for (std::size_t j = i + 1; j < labels_[a].size(); ++j)
          if (labels_[a][i] == labels_[a][j])
            throw StructuralError("duplicate type label '" + labels_[a][i] + "' for agent " +
                                  std::to_string(a + 1));
      first_.push_back(first_.back() + static_cast<int>(labels_[a].size()));
    }
    if (labels_.empty()) throw StructuralError("universe needs at least one agent");
  }

  int agent_count() const { return static_cast<int>(labels_.size()); }
  int type_count() const { return first_.back(); }
  int agent_type_count(int agent) const { return first_[agent] - first_[agent - 1]; }
  int first_ordinal(int agent) const { return first_[agent - 1]; }

  int agent_of(int ordinal) const {
    int a = 1;
    while (first_[a] <= ordinal) ++a;
    return a;
  }

  const std::string& label(int ordinal) const {
    return labels_[agent_of(ordinal) - 1][ordinal - first_ordinal(agent_of(ordinal))];
  }

  std::string qualified_label(int ordinal) const {
    return std::to_string(agent_of(ordinal)) + ":" + label(ordinal);
  }

  int ordinal(int agent, const std::string& label) const {
    if (agent < 1 || agent > agent_count())
      throw StructuralError("no agent " + std::to_string(agent));
    const auto& row = labels_[agent - 1];
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i] == label) return first_[agent - 1] + static_cast<int>(i);
    throw StructuralError("agent " + std::to_string(agent) + " has no type '" + label + "'");
  }

  TypeMask agent_mask(int agent) const {
    TypeMask m = 0;
    for (int t = first_[agent - 1]; t < first_[agent]; ++t) m |= TypeMask(1) << t;
    return m;
  }

  TypeMask full_mask() const {
    return type_count() == 32 ? ~TypeMask(0) : (TypeMask(1) << type_count()) - 1;
  }

 private:
  std::vector<std::vector<std::string>> labels_;
  std::vector<int> first_{0};
};

// One realized type per agent; chosen[a-1] is a global ordinal of agent a.
struct TypeProfile {
  std::vector<int> chosen;
};

// Per-type probability mass, indexed by global ordinal.  Each agent's block
// must sum to one.
template <typename Scalar>
void validate_mass(const TypeUniverse& u, const Vec<Scalar>& mass, double tol = kFeasTol) {
  if (mass.size() != u.type_count()) throw StructuralError("mass vector has wrong length");
  for (int t = 0; t < mass.size(); ++t)
    if (mass[t] < Scalar(0)) throw StructuralError("negative mass at " + u.qualified_label(t));
  for (int a = 1; a <= u.agent_count(); ++a) {
    Scalar s(0);
    for (int t = u.first_ordinal(a); t < u.first_ordinal(a) + u.agent_type_count(a); ++t) s += mass[t];
    if (to_double_generic(scalar_abs(Scalar(s - Scalar(1)))) > tol)
      throw StructuralError("agent " + std::to_string(a) + " mass does not sum to one");
  }
}

// x_bar(t) = x(t) * f(t)
template <typename Scalar>
Vec<Scalar> normalize(const Vec<Scalar>& interim_rule, const Vec<Scalar>& mass) {
  if (interim_rule.size() != mass.size()) throw StructuralError("rule/mass length mismatch");
  return interim_rule.cwiseProduct(mass);
}

// Inverse of normalize.  Zero-mass types must carry zero normalized mass and
// map to service probability zero; x_bar may not exceed f.
template <typename Scalar>
Vec<Scalar> denormalize(const Vec<Scalar>& normalized_rule, const Vec<Scalar>& mass,
                        double tol = kFeasTol) {
  if (normalized_rule.size() != mass.size()) throw StructuralError("rule/mass length mismatch");
  Vec<Scalar> x(mass.size());
  for (int t = 0; t < mass.size(); ++t) {
    if (normalized_rule[t] < Scalar(0))
      throw InfeasibleMassError("negative normalized mass at ordinal " + std::to_string(t));
    if (mass[t] == Scalar(0)) {
      if (to_double_generic(normalized_rule[t]) > tol)
        throw InfeasibleMassError("normalized mass on zero-probability type at ordinal " +
                                  std::to_string(t));
      x[t] = Scalar(0);
      continue;
    }
    x[t] = normalized_rule[t] / mass[t];
    if (to_double_generic(x[t]) > 1.0 + tol)
      throw InfeasibleMassError("normalized mass exceeds type mass at ordinal " + std::to_string(t));
  }
  return x;
}

inline TypeProfile sample_profile(const TypeUniverse& u, const VecXd& mass, Rng& rng) {
  TypeProfile p;
  p.chosen.reserve(u.agent_count());
  for (int a = 1; a <= u.agent_count(); ++a) {
    int base = u.first_ordinal(a);
    int n = u.agent_type_count(a);
    p.chosen.push_back(base + sample_index(rng, mass.segment(base, n)));
  }
  return p;
}

inline TypeMask profile_mask(const TypeProfile& p) {
  TypeMask m = 0;
  for (int t : p.chosen) m |= TypeMask(1) << t;
  return m;
}

// Realized types of the profile that lie in S.
inline TypeMask profile_intersection(const TypeProfile& p, TypeMask S) {
  return profile_mask(p) & S;
}

// Enumerates all type profiles, invoking fn(profile, mass_of_profile).
// Guarded: the profile count must not exceed the cap.
template <typename Scalar, typename Fn>
void for_each_profile(const TypeUniverse& u, const Vec<Scalar>& mass, Fn&& fn,
                      long long guard = 200000) {
  long long count = 1;
  for (int a = 1; a <= u.agent_count(); ++a) {
    count *= u.agent_type_count(a);
    if (count > guard)
      throw InstanceTooLargeError("profile enumeration over " + std::to_string(count) +
                                  "+ profiles exceeds guard " + std::to_string(guard));
  }
  TypeProfile p;
  p.chosen.assign(u.agent_count(), 0);
  for (int a = 1; a <= u.agent_count(); ++a) p.chosen[a - 1] = u.first_ordinal(a);
  while (true) {
    Scalar w(1);
    for (int t : p.chosen) w *= mass[t];
    fn(const_cast<const TypeProfile&>(p), w);
    int a = u.agent_count();
    while (a >= 1) {
      int limit = u.first_ordinal(a) + u.agent_type_count(a) - 1;
      if (p.chosen[a - 1] < limit) {
        ++p.chosen[a - 1];
        break;
      }
      p.chosen[a - 1] = u.first_ordinal(a);
      --a;
    }
    if (a == 0) break;
  }
}

}  // namespace auction
