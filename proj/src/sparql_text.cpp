#include "fedmesh/sparql_text.hpp"

#include <cctype>

namespace fedmesh {

namespace {

std::string escaped(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

// A numeric literal renders bare only when reparsing the bare form would
// reproduce the datatype exactly.
bool bare_numeric_form(const Term& t) {
    if (!t.is_literal() || !t.language.empty()) return false;
    const std::string& lex = t.lexical;
    if (lex.empty()) return false;
    size_t i = (lex[0] == '+' || lex[0] == '-') ? 1 : 0;
    if (i >= lex.size()) return false;
    bool digits = false, dot = false, exponent = false;
    for (; i < lex.size(); ++i) {
        char c = lex[i];
        if (std::isdigit(static_cast<unsigned char>(c))) { digits = true; continue; }
        if (c == '.' && !dot && !exponent) { dot = true; continue; }
        if ((c == 'e' || c == 'E') && !exponent && digits) {
            exponent = true;
            if (i + 1 < lex.size() && (lex[i + 1] == '+' || lex[i + 1] == '-')) ++i;
            continue;
        }
        return false;
    }
    if (!digits) return false;
    if (dot && lex.back() == '.') return false;  // "3." would reparse as 3 and a dot
    if (exponent) return t.datatype == xsd::dbl;
    if (dot) return t.datatype == xsd::decimal;
    return t.datatype == xsd::integer;
}

}  // namespace

std::string term_text(const Term& t) {
    switch (t.kind) {
        case TermKind::Iri:
            return "<" + t.lexical + ">";
        case TermKind::BlankNode:
            return "_:" + t.lexical;
        case TermKind::Literal:
            if (bare_numeric_form(t)) return t.lexical;
            if (!t.language.empty())
                return "\"" + escaped(t.lexical) + "\"@" + t.language;
            if (!t.datatype.empty())
                return "\"" + escaped(t.lexical) + "\"^^<" + t.datatype + ">";
            return "\"" + escaped(t.lexical) + "\"";
    }
    return "";
}

std::string slot_text(const TermOrVar& tv) {
    if (is_var(tv)) return "?" + as_var(tv).name;
    return term_text(as_term(tv));
}

std::string pattern_text(const TriplePattern& p) {
    return slot_text(p.subject) + " " + slot_text(p.predicate) + " " +
           slot_text(p.object);
}

std::string expr_text(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Constant:
            return term_text(e.term);
        case Expr::Kind::Var:
            return "?" + e.var;
        case Expr::Kind::Bound:
            return "bound(?" + e.var + ")";
        case Expr::Kind::Regex: {
            std::string out = "regex(" + expr_text(*e.args[0]) + ", \"" +
                              escaped(e.regex_pattern) + "\"";
            if (!e.regex_flags.empty()) out += ", \"" + escaped(e.regex_flags) + "\"";
            return out + ")";
        }
        case Expr::Kind::Not:
            return "!(" + expr_text(*e.args[0]) + ")";
        case Expr::Kind::And:
            return "(" + expr_text(*e.args[0]) + " && " + expr_text(*e.args[1]) + ")";
        case Expr::Kind::Or:
            return "(" + expr_text(*e.args[0]) + " || " + expr_text(*e.args[1]) + ")";
        case Expr::Kind::Cmp: {
            const char* op = "=";
            switch (e.op) {
                case Expr::CmpOp::Eq: op = "="; break;
                case Expr::CmpOp::Ne: op = "!="; break;
                case Expr::CmpOp::Lt: op = "<"; break;
                case Expr::CmpOp::Le: op = "<="; break;
                case Expr::CmpOp::Gt: op = ">"; break;
                case Expr::CmpOp::Ge: op = ">="; break;
            }
            return "(" + expr_text(*e.args[0]) + " " + op + " " +
                   expr_text(*e.args[1]) + ")";
        }
    }
    return "";
}

std::string select_subquery(const std::vector<TriplePattern>& patterns,
                            const std::vector<ExprPtr>& filters) {
    std::string q = "SELECT * WHERE { ";
    for (const TriplePattern& p : patterns) q += pattern_text(p) + " . ";
    for (const ExprPtr& f : filters) q += "FILTER(" + expr_text(*f) + ") ";
    q += "}";
    return q;
}

std::string ask_subquery(const TriplePattern& p) {
    return "ASK { " + pattern_text(p) + " . }";
}

}  // namespace fedmesh
