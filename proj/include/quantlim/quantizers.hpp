#pragma once

#include <Eigen/Dense>
#include <compare>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "quantlim/intervals.hpp"

namespace quantlim {

// Joint outcome of one superquantizer; symbols are 1-based level indices.
struct OutcomeVector {
  std::vector<int> symbols;

  auto operator<=>(const OutcomeVector&) const = default;
};

// One quantization cell: either a union of pairwise-disjoint axis-aligned
// rectangles, or the complement of all other cells (at most one per quantizer).
struct QuantizerCell {
  bool is_complement = false;
  std::vector<Rect> rects;
};

struct VectorQuantizer {
  int dim_in = 1;
  std::vector<QuantizerCell> cells;

  int levels() const { return static_cast<int>(cells.size()); }
  std::optional<int> complement_index() const;  // 0-based cell index

  void validate() const;

  // 1-based level of the unique cell containing x. Throws ValidationError when
  // x falls outside every region and no complement cell exists.
  int quantize(const Eigen::VectorXd& x) const;

  // Canonical region list (rects sorted within each cell); two quantizers are
  // "identical" exactly when these compare equal.
  nlohmann::json descriptor() const;
};

struct SuperQuantizer {
  std::vector<VectorQuantizer> quantizers;

  int size() const { return static_cast<int>(quantizers.size()); }
  int dim_in() const;
  std::vector<int> partition() const;  // per-quantizer input dimensions

  void validate() const;

  OutcomeVector apply(const Eigen::VectorXd& x) const;

  long alphabet_size() const;  // product of levels
  std::vector<OutcomeVector> outcome_alphabet() const;

  // Position of an outcome in the lexicographic alphabet.
  long flat_index(const OutcomeVector& s) const;

  nlohmann::json descriptor() const;
};

}  // namespace quantlim
