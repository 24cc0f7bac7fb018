#include "fedmesh/ast.hpp"

#include <algorithm>

namespace fedmesh {

namespace {

void push_unique(std::vector<std::string>& out, const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

void collect_expr_vars(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Bound)
        push_unique(out, e.var);
    for (const auto& a : e.args) collect_expr_vars(*a, out);
}

}  // namespace

ExprPtr Expr::constant(Term t) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Constant;
    e->term = std::move(t);
    return e;
}

ExprPtr Expr::variable(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->var = std::move(name);
    return e;
}

ExprPtr Expr::cmp(CmpOp op, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Cmp;
    e->op = op;
    e->args = {std::move(l), std::move(r)};
    return e;
}

ExprPtr Expr::logical_and(ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::And;
    e->args = {std::move(l), std::move(r)};
    return e;
}

ExprPtr Expr::logical_or(ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Or;
    e->args = {std::move(l), std::move(r)};
    return e;
}

ExprPtr Expr::logical_not(ExprPtr inner) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Not;
    e->args = {std::move(inner)};
    return e;
}

ExprPtr Expr::regex(ExprPtr text, std::string pattern, std::string flags) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Regex;
    e->args = {std::move(text)};
    e->regex_pattern = std::move(pattern);
    e->regex_flags = std::move(flags);
    return e;
}

ExprPtr Expr::bound(std::string var) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Bound;
    e->var = std::move(var);
    return e;
}

std::vector<std::string> Expr::variables() const {
    std::vector<std::string> out;
    collect_expr_vars(*this, out);
    return out;
}

PatternPtr GraphPattern::bgp(std::vector<TriplePattern> patterns) {
    auto g = std::make_shared<GraphPattern>();
    g->kind = Kind::Bgp;
    g->patterns = std::move(patterns);
    return g;
}

PatternPtr GraphPattern::join(PatternPtr l, PatternPtr r) {
    auto g = std::make_shared<GraphPattern>();
    g->kind = Kind::Join;
    g->children = {std::move(l), std::move(r)};
    return g;
}

PatternPtr GraphPattern::union_(PatternPtr l, PatternPtr r) {
    auto g = std::make_shared<GraphPattern>();
    g->kind = Kind::Union;
    g->children = {std::move(l), std::move(r)};
    return g;
}

PatternPtr GraphPattern::left_join(PatternPtr l, PatternPtr r) {
    auto g = std::make_shared<GraphPattern>();
    g->kind = Kind::LeftJoin;
    g->children = {std::move(l), std::move(r)};
    return g;
}

PatternPtr GraphPattern::filter(PatternPtr child, std::vector<ExprPtr> exprs) {
    auto g = std::make_shared<GraphPattern>();
    g->kind = Kind::Filter;
    g->children = {std::move(child)};
    g->filters = std::move(exprs);
    return g;
}

std::vector<TriplePattern> GraphPattern::all_patterns() const {
    std::vector<TriplePattern> out;
    if (kind == Kind::Bgp) {
        out.insert(out.end(), patterns.begin(), patterns.end());
    }
    for (const auto& c : children) {
        auto sub = c->all_patterns();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::vector<std::string> GraphPattern::variables() const {
    std::vector<std::string> out;
    for (const TriplePattern& p : all_patterns())
        for (const std::string& v : p.variables()) push_unique(out, v);
    return out;
}

std::vector<std::string> Query::output_variables() const {
    if (form == QueryForm::Ask) return {};
    std::vector<std::string> out;
    if (select_all) {
        out = where ? where->variables() : std::vector<std::string>{};
    } else {
        out = projection;
    }
    if (count) push_unique(out, count->output_var);
    return out;
}

}  // namespace fedmesh
