#include "quantlim/quantizers.hpp"

#include <algorithm>
#include <string>

#include "quantlim/errors.hpp"

namespace quantlim {

std::optional<int> VectorQuantizer::complement_index() const {
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (cells[r].is_complement) return static_cast<int>(r);
  }
  return std::nullopt;
}

void VectorQuantizer::validate() const {
  if (dim_in < 1) throw ValidationError("quantizer: dim must be >= 1");
  if (cells.empty()) throw ValidationError("quantizer: levels must be >= 1");
  int complements = 0;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const auto& cell = cells[r];
    if (cell.is_complement) {
      ++complements;
      if (!cell.rects.empty()) {
        throw ValidationError("quantizer: complement cell must not list rectangles");
      }
      continue;
    }
    if (cell.rects.empty()) {
      throw ValidationError("quantizer: cell " + std::to_string(r + 1) + " has no rectangles");
    }
    for (const auto& rect : cell.rects) {
      if (static_cast<int>(rect.size()) != dim_in) {
        throw ValidationError("quantizer: cell " + std::to_string(r + 1) +
                              " rectangle dimension differs from quantizer dim");
      }
      for (std::size_t k = 0; k < rect.size(); ++k) {
        if (!(rect[k].lo < rect[k].hi)) {
          throw ValidationError("quantizer: cell " + std::to_string(r + 1) + " axis " +
                                std::to_string(k) + " has lower >= upper");
        }
      }
    }
  }
  if (complements > 1) {
    throw ValidationError("quantizer: at most one complement cell is allowed");
  }
  // Pairwise disjointness across all explicit rectangles (within and across cells).
  std::vector<std::pair<std::size_t, const Rect*>> all;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (const auto& rect : cells[r].rects) all.emplace_back(r, &rect);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (rects_overlap(*all[i].second, *all[j].second)) {
        throw ValidationError("quantizer: cells " + std::to_string(all[i].first + 1) + " and " +
                              std::to_string(all[j].first + 1) + " have overlapping rectangles");
      }
    }
  }
}

int VectorQuantizer::quantize(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in) {
    throw ValidationError("quantize: input has length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(dim_in));
  }
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (cells[r].is_complement) continue;
    for (const auto& rect : cells[r].rects) {
      if (rect_contains(rect, x.data())) return static_cast<int>(r) + 1;
    }
  }
  if (auto c = complement_index()) return *c + 1;
  throw ValidationError("quantize: point falls outside every region and no complement cell exists");
}

namespace {

nlohmann::json rect_to_json(const Rect& rect) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& iv : rect) {
    axes.push_back({iv.lo, iv.hi});
  }
  return axes;
}

bool rect_less(const Rect& a, const Rect& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].lo != b[k].lo) return a[k].lo < b[k].lo;
    if (a[k].hi != b[k].hi) return a[k].hi < b[k].hi;
  }
  return false;
}

}  // namespace

nlohmann::json VectorQuantizer::descriptor() const {
  nlohmann::json cell_list = nlohmann::json::array();
  for (const auto& cell : cells) {
    if (cell.is_complement) {
      cell_list.push_back({{"complement", true}});
    } else {
      std::vector<Rect> sorted = cell.rects;
      std::sort(sorted.begin(), sorted.end(), rect_less);
      nlohmann::json rects = nlohmann::json::array();
      for (const auto& r : sorted) rects.push_back(rect_to_json(r));
      cell_list.push_back({{"rects", std::move(rects)}});
    }
  }
  return {{"dim", dim_in}, {"cells", std::move(cell_list)}};
}

int SuperQuantizer::dim_in() const {
  int d = 0;
  for (const auto& q : quantizers) d += q.dim_in;
  return d;
}

std::vector<int> SuperQuantizer::partition() const {
  std::vector<int> dims;
  dims.reserve(quantizers.size());
  for (const auto& q : quantizers) dims.push_back(q.dim_in);
  return dims;
}

void SuperQuantizer::validate() const {
  if (quantizers.empty()) throw ValidationError("superquantizer must contain at least one quantizer");
  for (const auto& q : quantizers) q.validate();
}

OutcomeVector SuperQuantizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in()) {
    throw ValidationError("superquantizer: input has length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(dim_in()));
  }
  OutcomeVector out;
  out.symbols.reserve(quantizers.size());
  int offset = 0;
  for (const auto& q : quantizers) {
    out.symbols.push_back(q.quantize(x.segment(offset, q.dim_in)));
    offset += q.dim_in;
  }
  return out;
}

long SuperQuantizer::alphabet_size() const {
  long n = 1;
  for (const auto& q : quantizers) n *= q.levels();
  return n;
}

std::vector<OutcomeVector> SuperQuantizer::outcome_alphabet() const {
  std::vector<OutcomeVector> alphabet;
  alphabet.reserve(static_cast<std::size_t>(alphabet_size()));
  OutcomeVector cur;
  cur.symbols.assign(quantizers.size(), 1);
  while (true) {
    alphabet.push_back(cur);
    // lexicographic odometer, last symbol fastest
    int l = static_cast<int>(quantizers.size()) - 1;
    while (l >= 0) {
      if (cur.symbols[l] < quantizers[l].levels()) {
        ++cur.symbols[l];
        break;
      }
      cur.symbols[l] = 1;
      --l;
    }
    if (l < 0) break;
  }
  return alphabet;
}

long SuperQuantizer::flat_index(const OutcomeVector& s) const {
  if (s.symbols.size() != quantizers.size()) {
    throw ValidationError("outcome has wrong number of symbols for this superquantizer");
  }
  long idx = 0;
  for (std::size_t l = 0; l < quantizers.size(); ++l) {
    int r = s.symbols[l];
    if (r < 1 || r > quantizers[l].levels()) {
      throw ValidationError("outcome symbol " + std::to_string(r) + " out of range at slot " +
                            std::to_string(l));
    }
    idx = idx * quantizers[l].levels() + (r - 1);
  }
  return idx;
}

nlohmann::json SuperQuantizer::descriptor() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& q : quantizers) list.push_back(q.descriptor());
  return list;
}

}  // namespace quantlim
