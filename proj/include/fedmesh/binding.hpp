#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedmesh/term.hpp"

namespace fedmesh {

/// A solution mapping: partial map from variable name to term. Unbound
/// variables are simply absent.
class BindingRow {
public:
    BindingRow() = default;

    const Term* get(const std::string& var) const {
        auto it = map_.find(var);
        return it == map_.end() ? nullptr : &it->second;
    }

    bool bound(const std::string& var) const { return map_.count(var) > 0; }

    void set(const std::string& var, Term value) { map_[var] = std::move(value); }

    std::size_t size() const { return map_.size(); }
    bool empty() const { return map_.empty(); }

    auto begin() const { return map_.begin(); }
    auto end() const { return map_.end(); }

    auto operator<=>(const BindingRow&) const = default;

private:
    std::map<std::string, Term> map_;
};

/// Two rows are compatible when every variable bound in both maps to the
/// same term.
bool rows_compatible(const BindingRow& a, const BindingRow& b);

/// Union of two compatible rows.
BindingRow merge_rows(const BindingRow& a, const BindingRow& b);

/// Ordered sequence of solution rows plus the projected variable list.
/// ASK results use the boolean field instead of rows.
struct SolutionSeq {
    std::vector<std::string> vars;
    std::vector<BindingRow> rows;
    std::optional<bool> boolean;

    bool is_ask() const { return boolean.has_value(); }
};

}  // namespace fedmesh
