#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedmesh/term.hpp"

namespace fedmesh {

/// Filter expression tree. Only the operators of the supported FILTER subset
/// exist; anything else is rejected at parse time.
struct Expr {
    enum class Kind : std::uint8_t { Constant, Var, Cmp, And, Or, Not, Regex, Bound };
    enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

    Kind kind = Kind::Constant;
    Term term;            // Constant
    std::string var;      // Var, Bound
    CmpOp op = CmpOp::Eq; // Cmp
    std::vector<std::shared_ptr<const Expr>> args;  // Cmp:2, And/Or:2, Not:1, Regex:1
    std::string regex_pattern;  // Regex
    std::string regex_flags;    // Regex

    static std::shared_ptr<const Expr> constant(Term t);
    static std::shared_ptr<const Expr> variable(std::string name);
    static std::shared_ptr<const Expr> cmp(CmpOp op, std::shared_ptr<const Expr> l,
                                           std::shared_ptr<const Expr> r);
    static std::shared_ptr<const Expr> logical_and(std::shared_ptr<const Expr> l,
                                                   std::shared_ptr<const Expr> r);
    static std::shared_ptr<const Expr> logical_or(std::shared_ptr<const Expr> l,
                                                  std::shared_ptr<const Expr> r);
    static std::shared_ptr<const Expr> logical_not(std::shared_ptr<const Expr> e);
    static std::shared_ptr<const Expr> regex(std::shared_ptr<const Expr> text,
                                             std::string pattern, std::string flags);
    static std::shared_ptr<const Expr> bound(std::string var);

    /// Variables mentioned anywhere in the expression, first occurrence order.
    std::vector<std::string> variables() const;
};

using ExprPtr = std::shared_ptr<const Expr>;

/// Graph pattern algebra. FILTERs attach to the group they appeared in;
/// OPTIONAL becomes LeftJoin; adjacent groups join.
struct GraphPattern {
    enum class Kind : std::uint8_t { Bgp, Join, Union, LeftJoin, Filter };

    Kind kind = Kind::Bgp;
    std::vector<TriplePattern> patterns;               // Bgp
    std::vector<std::shared_ptr<GraphPattern>> children;  // Join/Union/LeftJoin:2, Filter:1
    std::vector<ExprPtr> filters;                      // Filter

    static std::shared_ptr<GraphPattern> bgp(std::vector<TriplePattern> patterns);
    static std::shared_ptr<GraphPattern> join(std::shared_ptr<GraphPattern> l,
                                              std::shared_ptr<GraphPattern> r);
    static std::shared_ptr<GraphPattern> union_(std::shared_ptr<GraphPattern> l,
                                                std::shared_ptr<GraphPattern> r);
    static std::shared_ptr<GraphPattern> left_join(std::shared_ptr<GraphPattern> l,
                                                   std::shared_ptr<GraphPattern> r);
    static std::shared_ptr<GraphPattern> filter(std::shared_ptr<GraphPattern> child,
                                                std::vector<ExprPtr> exprs);

    /// All triple patterns in the subtree, left-to-right syntactic order.
    std::vector<TriplePattern> all_patterns() const;
    /// Variables bound anywhere in the subtree, first occurrence order.
    std::vector<std::string> variables() const;
};

using PatternPtr = std::shared_ptr<GraphPattern>;

enum class QueryForm : std::uint8_t { Select, Ask };

struct OrderKey {
    std::string var;
    bool ascending = true;

    bool operator==(const OrderKey&) const = default;
};

/// The COUNT aggregate, the only one supported.
struct CountSpec {
    std::string output_var;               // the AS alias
    std::optional<std::string> arg_var;   // nullopt means COUNT(*)
    bool distinct = false;
};

struct Modifiers {
    bool distinct = false;
    std::vector<std::string> group_by;
    std::vector<OrderKey> order_by;
    std::optional<std::uint64_t> limit;
    std::uint64_t offset = 0;
};

struct Query {
    QueryForm form = QueryForm::Select;
    bool select_all = false;                // SELECT *
    std::vector<std::string> projection;    // explicit projected vars
    std::optional<CountSpec> count;         // present when SELECT has COUNT
    PatternPtr where;
    Modifiers modifiers;

    /// Variables the result rows carry: the explicit projection (plus the
    /// count alias), or every in-scope variable for SELECT *.
    std::vector<std::string> output_variables() const;
};

}  // namespace fedmesh
