#include "fedmesh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <string>

namespace fedmesh {

namespace {

TermOrVar substitute_slot(const TermOrVar& slot, const BindingRow& row) {
    if (!is_var(slot)) return slot;
    if (const Term* t = row.get(as_var(slot).name)) return *t;
    return slot;
}

bool is_plain_string(const Term& t) {
    return t.is_literal() && t.language.empty() &&
           (t.datatype.empty() || t.datatype == xsd::string);
}

// Effective boolean value; nullopt on types that have none.
std::optional<bool> ebv(const Term& t) {
    if (!t.is_literal()) return std::nullopt;
    if (t.datatype == xsd::boolean) {
        if (t.lexical == "true" || t.lexical == "1") return true;
        if (t.lexical == "false" || t.lexical == "0") return false;
        return std::nullopt;
    }
    if (is_numeric_literal(t)) {
        double v = numeric_value(t);
        if (std::isnan(v)) return false;
        return v != 0.0;
    }
    if (is_plain_string(t)) return !t.lexical.empty();
    return std::nullopt;
}

// Evaluates a filter operand to a term. Boolean-valued subexpressions become
// xsd:boolean literals so they can feed comparisons uniformly.
std::optional<Term> eval_operand(const Expr& e, const BindingRow& row) {
    switch (e.kind) {
        case Expr::Kind::Constant:
            return e.term;
        case Expr::Kind::Var: {
            const Term* t = row.get(e.var);
            if (!t) return std::nullopt;
            return *t;
        }
        default: {
            std::optional<bool> b = eval_expr(e, row);
            if (!b) return std::nullopt;
            return Term::literal(*b ? "true" : "false", xsd::boolean);
        }
    }
}

std::optional<bool> eval_cmp(const Expr& e, const BindingRow& row) {
    std::optional<Term> lhs = eval_operand(*e.args[0], row);
    std::optional<Term> rhs = eval_operand(*e.args[1], row);
    if (!lhs || !rhs) return std::nullopt;

    bool numeric = is_numeric_literal(*lhs) && is_numeric_literal(*rhs);
    if (e.op == Expr::CmpOp::Eq || e.op == Expr::CmpOp::Ne) {
        bool eq = numeric ? numeric_value(*lhs) == numeric_value(*rhs) : *lhs == *rhs;
        return e.op == Expr::CmpOp::Eq ? eq : !eq;
    }

    int sign;
    if (numeric) {
        double l = numeric_value(*lhs), r = numeric_value(*rhs);
        if (std::isnan(l) || std::isnan(r)) return std::nullopt;
        sign = l < r ? -1 : l > r ? 1 : 0;
    } else if (is_plain_string(*lhs) && is_plain_string(*rhs)) {
        int c = lhs->lexical.compare(rhs->lexical);
        sign = c < 0 ? -1 : c > 0 ? 1 : 0;
    } else {
        return std::nullopt;  // ordering undefined across other types
    }
    switch (e.op) {
        case Expr::CmpOp::Lt: return sign < 0;
        case Expr::CmpOp::Le: return sign <= 0;
        case Expr::CmpOp::Gt: return sign > 0;
        case Expr::CmpOp::Ge: return sign >= 0;
        default: return std::nullopt;  // unreachable
    }
}

std::optional<bool> eval_regex(const Expr& e, const BindingRow& row) {
    std::optional<Term> text = eval_operand(*e.args[0], row);
    if (!text || !is_plain_string(*text)) return std::nullopt;
    auto flags = std::regex::ECMAScript;
    for (char f : e.regex_flags) {
        if (f == 'i') flags |= std::regex::icase;
        else return std::nullopt;  // unsupported flag
    }
    try {
        return std::regex_search(text->lexical, std::regex(e.regex_pattern, flags));
    } catch (const std::regex_error&) {
        return std::nullopt;
    }
}

std::vector<BindingRow> eval_bgp(const Store& store,
                                 const std::vector<TriplePattern>& patterns) {
    std::vector<BindingRow> rows{BindingRow{}};
    for (const TriplePattern& pattern : patterns) {
        std::vector<BindingRow> next;
        for (const BindingRow& row : rows) {
            for (const BindingRow& m : store.match(substitute(pattern, row)))
                next.push_back(merge_rows(row, m));
        }
        rows = std::move(next);
        if (rows.empty()) break;
    }
    return rows;
}

std::vector<BindingRow> join_rows(const std::vector<BindingRow>& left,
                                  const std::vector<BindingRow>& right) {
    std::vector<BindingRow> out;
    for (const BindingRow& l : left)
        for (const BindingRow& r : right)
            if (rows_compatible(l, r)) out.push_back(merge_rows(l, r));
    return out;
}

// Group key: values of the group variables, unbound marked separately.
using GroupKey = std::vector<std::optional<Term>>;

Term count_literal(size_t n) {
    return Term::literal(std::to_string(n), xsd::integer);
}

std::vector<BindingRow> group_and_count(const Query& q, std::vector<BindingRow> rows) {
    const auto& group_vars = q.modifiers.group_by;
    std::map<GroupKey, std::vector<BindingRow>> groups;
    if (group_vars.empty()) {
        // implicit single group, present even for empty input
        groups[{}] = std::move(rows);
    } else {
        for (BindingRow& row : rows) {
            GroupKey key;
            for (const std::string& v : group_vars) {
                const Term* t = row.get(v);
                key.push_back(t ? std::optional<Term>(*t) : std::nullopt);
            }
            groups[std::move(key)].push_back(std::move(row));
        }
    }

    std::vector<BindingRow> out;
    for (auto& [key, members] : groups) {
        BindingRow row;
        for (size_t i = 0; i < group_vars.size(); ++i)
            if (key[i]) row.set(group_vars[i], *key[i]);
        if (q.count) {
            size_t n = 0;
            if (!q.count->arg_var) {
                if (q.count->distinct) {
                    std::set<BindingRow> uniq(members.begin(), members.end());
                    n = uniq.size();
                } else {
                    n = members.size();
                }
            } else if (q.count->distinct) {
                std::set<Term> uniq;
                for (const BindingRow& m : members)
                    if (const Term* t = m.get(*q.count->arg_var)) uniq.insert(*t);
                n = uniq.size();
            } else {
                for (const BindingRow& m : members)
                    if (m.get(*q.count->arg_var)) ++n;
            }
            row.set(q.count->output_var, count_literal(n));
        }
        out.push_back(std::move(row));
    }
    return out;
}

void order_rows(const std::vector<OrderKey>& keys, std::vector<BindingRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&keys](const BindingRow& a, const BindingRow& b) {
                         for (const OrderKey& k : keys) {
                             int c = term_order(a.get(k.var), b.get(k.var));
                             if (!k.ascending) c = -c;
                             if (c != 0) return c < 0;
                         }
                         return false;
                     });
}

}  // namespace

TriplePattern substitute(const TriplePattern& pattern, const BindingRow& row) {
    TriplePattern out;
    out.subject = substitute_slot(pattern.subject, row);
    out.predicate = substitute_slot(pattern.predicate, row);
    out.object = substitute_slot(pattern.object, row);
    return out;
}

std::optional<bool> eval_expr(const Expr& expr, const BindingRow& row) {
    switch (expr.kind) {
        case Expr::Kind::Constant:
            return ebv(expr.term);
        case Expr::Kind::Var: {
            const Term* t = row.get(expr.var);
            if (!t) return std::nullopt;
            return ebv(*t);
        }
        case Expr::Kind::Bound:
            return row.bound(expr.var);
        case Expr::Kind::Cmp:
            return eval_cmp(expr, row);
        case Expr::Kind::Regex:
            return eval_regex(expr, row);
        case Expr::Kind::Not: {
            std::optional<bool> v = eval_expr(*expr.args[0], row);
            if (!v) return std::nullopt;
            return !*v;
        }
        case Expr::Kind::And: {
            std::optional<bool> l = eval_expr(*expr.args[0], row);
            std::optional<bool> r = eval_expr(*expr.args[1], row);
            if (l && !*l) return false;
            if (r && !*r) return false;
            if (l && r) return true;
            return std::nullopt;
        }
        case Expr::Kind::Or: {
            std::optional<bool> l = eval_expr(*expr.args[0], row);
            std::optional<bool> r = eval_expr(*expr.args[1], row);
            if (l && *l) return true;
            if (r && *r) return true;
            if (l && r) return false;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

bool filters_pass(const std::vector<ExprPtr>& filters, const BindingRow& row) {
    for (const ExprPtr& f : filters) {
        std::optional<bool> v = eval_expr(*f, row);
        if (!v || !*v) return false;
    }
    return true;
}

std::vector<BindingRow> eval_pattern(const Store& store, const GraphPattern& pattern) {
    switch (pattern.kind) {
        case GraphPattern::Kind::Bgp:
            return eval_bgp(store, pattern.patterns);
        case GraphPattern::Kind::Join:
            return join_rows(eval_pattern(store, *pattern.children[0]),
                             eval_pattern(store, *pattern.children[1]));
        case GraphPattern::Kind::Union: {
            std::vector<BindingRow> out = eval_pattern(store, *pattern.children[0]);
            std::vector<BindingRow> right = eval_pattern(store, *pattern.children[1]);
            out.insert(out.end(), std::make_move_iterator(right.begin()),
                       std::make_move_iterator(right.end()));
            return out;
        }
        case GraphPattern::Kind::LeftJoin: {
            std::vector<BindingRow> left = eval_pattern(store, *pattern.children[0]);
            std::vector<BindingRow> right = eval_pattern(store, *pattern.children[1]);
            std::vector<BindingRow> out;
            for (const BindingRow& l : left) {
                bool matched = false;
                for (const BindingRow& r : right) {
                    if (rows_compatible(l, r)) {
                        out.push_back(merge_rows(l, r));
                        matched = true;
                    }
                }
                if (!matched) out.push_back(l);
            }
            return out;
        }
        case GraphPattern::Kind::Filter: {
            std::vector<BindingRow> rows = eval_pattern(store, *pattern.children[0]);
            std::vector<BindingRow> out;
            for (BindingRow& row : rows)
                if (filters_pass(pattern.filters, row)) out.push_back(std::move(row));
            return out;
        }
    }
    return {};
}

SolutionSeq apply_modifiers(const Query& query, std::vector<BindingRow> rows) {
    SolutionSeq seq;
    if (query.form == QueryForm::Ask) {
        seq.boolean = !rows.empty();
        return seq;
    }
    seq.vars = query.output_variables();

    if (query.count || !query.modifiers.group_by.empty())
        rows = group_and_count(query, std::move(rows));

    if (!query.modifiers.order_by.empty())
        order_rows(query.modifiers.order_by, rows);

    // projection
    std::vector<BindingRow> projected;
    projected.reserve(rows.size());
    for (const BindingRow& row : rows) {
        BindingRow p;
        for (const std::string& v : seq.vars)
            if (const Term* t = row.get(v)) p.set(v, *t);
        projected.push_back(std::move(p));
    }

    if (query.modifiers.distinct) {
        std::set<BindingRow> seen;
        std::vector<BindingRow> uniq;
        for (BindingRow& row : projected)
            if (seen.insert(row).second) uniq.push_back(std::move(row));
        projected = std::move(uniq);
    }

    std::uint64_t offset = query.modifiers.offset;
    if (offset >= projected.size()) {
        projected.clear();
    } else if (offset > 0) {
        projected.erase(projected.begin(), projected.begin() + offset);
    }
    if (query.modifiers.limit && projected.size() > *query.modifiers.limit)
        projected.resize(*query.modifiers.limit);

    seq.rows = std::move(projected);
    return seq;
}

SolutionSeq evaluate(const Store& store, const Query& query) {
    return apply_modifiers(query, eval_pattern(store, *query.where));
}

}  // namespace fedmesh
