#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fedmesh/binding.hpp"

namespace testsupport {

// Multiset equality of solution rows (order-insensitive).
inline bool same_rows_unordered(std::vector<fedmesh::BindingRow> a,
                                std::vector<fedmesh::BindingRow> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

inline bool same_rows_ordered(const std::vector<fedmesh::BindingRow>& a,
                              const std::vector<fedmesh::BindingRow>& b) {
  return a == b;
}

// Set equality (duplicates collapsed on both sides).
inline bool same_rows_set(std::vector<fedmesh::BindingRow> a,
                          std::vector<fedmesh::BindingRow> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return a == b;
}

}  // namespace testsupport
