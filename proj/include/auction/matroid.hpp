#pragma once

#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "auction/errors.hpp"
#include "auction/types.hpp"

namespace auction {

// Supply constraint exposed purely through its rank function.
struct MatroidOracle {
  std::function<int(TypeMask)> rank;
  int ground_size = 0;
  std::string kind;
};

inline int uniform_rank(int k, TypeMask S) { return std::min(popcount(S), k); }

inline int partition_rank(const std::vector<TypeMask>& blocks, const std::vector<int>& caps,
                          TypeMask S) {
  int r = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) r += std::min(popcount(S & blocks[b]), caps[b]);
  return r;
}

inline MatroidOracle uniform_matroid(int k, int ground_size) {
  if (k < 0) throw StructuralError("negative supply");
  return {[k](TypeMask S) { return uniform_rank(k, S); }, ground_size, "uniform"};
}

inline MatroidOracle partition_matroid(std::vector<TypeMask> blocks, std::vector<int> caps,
                                       int ground_size) {
  if (blocks.size() != caps.size()) throw StructuralError("one cap per block required");
  TypeMask seen = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (seen & blocks[b]) throw StructuralError("partition blocks overlap");
    if (caps[b] < 0) throw StructuralError("negative block cap");
    seen |= blocks[b];
  }
  TypeMask all = ground_size == 32 ? ~TypeMask(0) : (TypeMask(1) << ground_size) - 1;
  if (seen != all) throw StructuralError("partition blocks must cover every type");
  return {[blocks = std::move(blocks), caps = std::move(caps)](TypeMask S) {
            return partition_rank(blocks, caps, S);
          },
          ground_size, "partition"};
}

// Checks downward closure and the exchange axiom; empty report iff valid.
inline std::vector<std::string> validate_matroid(const std::vector<TypeMask>& independent,
                                                 int ground_size) {
  if (ground_size > 16) throw InstanceTooLargeError("explicit matroid ground set exceeds 16");
  std::vector<std::string> report;
  std::unordered_set<TypeMask> family(independent.begin(), independent.end());
  auto name = [](TypeMask S) {
    std::string s = "{";
    for (int e = 0; e < 32; ++e)
      if (S & (TypeMask(1) << e)) s += std::to_string(e) + ",";
    if (s.size() > 1) s.pop_back();
    return s + "}";
  };
  if (!family.count(0)) report.push_back("empty set is not independent");
  for (TypeMask I : independent)
    for (int e = 0; e < ground_size; ++e) {
      TypeMask bit = TypeMask(1) << e;
      if ((I & bit) && !family.count(I & ~bit)) {
        report.push_back("downward closure fails: " + name(I & ~bit) + " missing below " + name(I));
      }
    }
  for (TypeMask A : independent)
    for (TypeMask B : independent) {
      if (popcount(A) >= popcount(B)) continue;
      bool extended = false;
      for (int e = 0; e < ground_size && !extended; ++e) {
        TypeMask bit = TypeMask(1) << e;
        if ((B & bit) && !(A & bit) && family.count(A | bit)) extended = true;
      }
      if (!extended)
        report.push_back("exchange fails: " + name(A) + " cannot grow from " + name(B));
    }
  return report;
}

inline MatroidOracle explicit_matroid(std::vector<TypeMask> independent, int ground_size) {
  auto report = validate_matroid(independent, ground_size);
  if (!report.empty()) throw StructuralError("not a matroid: " + report.front());
  return {[independent = std::move(independent)](TypeMask S) {
            int best = 0;
            for (TypeMask I : independent)
              if ((I & ~S) == 0) best = std::max(best, popcount(I));
            return best;
          },
          ground_size, "explicit"};
}

inline bool is_independent(const MatroidOracle& m, TypeMask S) {
  return m.rank(S) == popcount(S);
}

}  // namespace auction
