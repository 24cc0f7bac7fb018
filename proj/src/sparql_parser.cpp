#include "fedmesh/sparql_parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedmesh/errors.hpp"

namespace fedmesh {

namespace {

enum class Tok : std::uint8_t {
    End, Iri, Pname, Var, String, Number, Word,
    LangTag, HatHat,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Dot, Semicolon, Comma, Star,
    Eq, Ne, Lt, Le, Gt, Ge, AndAnd, OrOr, Bang,
    Slash, Caret, Plus, Pipe,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    size_t line = 1;
    size_t col = 1;
};

bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}
bool pname_char(char c) { return name_char(c) || c == '.'; }

class Lexer {
  public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            Token t = next();
            bool end = t.kind == Tok::End;
            out.push_back(std::move(t));
            if (end) return out;
        }
    }

  private:
    std::string_view text_;
    size_t pos_ = 0, line_ = 1, col_ = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw QueryParseError(line_, col_, msg);
    }

    char peek(size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }
    char take() {
        char c = text_[pos_++];
        if (c == '\n') { ++line_; col_ = 1; } else { ++col_; }
        return c;
    }
    bool eof() const { return pos_ >= text_.size(); }

    void skip_space_and_comments() {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                return;
            }
        }
    }

    Token tok(Tok kind, std::string text, size_t line, size_t col) {
        return Token{kind, std::move(text), line, col};
    }

    Token next() {
        size_t line = line_, col = col_;
        if (eof()) return tok(Tok::End, "", line, col);
        char c = peek();

        if (c == '<') return angle(line, col);
        if (c == '"' || c == '\'') return string_literal(line, col);
        if (c == '?' || c == '$') return variable(line, col);
        if (c == '@') return lang_tag(line, col);
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(peek(1)))))
            return number(line, col);
        if (name_start(c) || c == ':') return word_or_pname(line, col);
        if (c == '_' ) return word_or_pname(line, col);

        take();
        switch (c) {
            case '{': return tok(Tok::LBrace, "{", line, col);
            case '}': return tok(Tok::RBrace, "}", line, col);
            case '(': return tok(Tok::LParen, "(", line, col);
            case ')': return tok(Tok::RParen, ")", line, col);
            case '[': return tok(Tok::LBracket, "[", line, col);
            case ']': return tok(Tok::RBracket, "]", line, col);
            case '.': return tok(Tok::Dot, ".", line, col);
            case ';': return tok(Tok::Semicolon, ";", line, col);
            case ',': return tok(Tok::Comma, ",", line, col);
            case '*': return tok(Tok::Star, "*", line, col);
            case '/': return tok(Tok::Slash, "/", line, col);
            case '+': return tok(Tok::Plus, "+", line, col);
            case '|':
                if (peek() == '|') { take(); return tok(Tok::OrOr, "||", line, col); }
                return tok(Tok::Pipe, "|", line, col);
            case '&':
                if (peek() == '&') { take(); return tok(Tok::AndAnd, "&&", line, col); }
                fail("expected '&&'");
            case '=': return tok(Tok::Eq, "=", line, col);
            case '!':
                if (peek() == '=') { take(); return tok(Tok::Ne, "!=", line, col); }
                return tok(Tok::Bang, "!", line, col);
            case '>':
                if (peek() == '=') { take(); return tok(Tok::Ge, ">=", line, col); }
                return tok(Tok::Gt, ">", line, col);
            case '^':
                if (peek() == '^') { take(); return tok(Tok::HatHat, "^^", line, col); }
                return tok(Tok::Caret, "^", line, col);
            default:
                fail(std::string("unexpected character '") + c + "'");
        }
    }

    // '<' begins an IRI when a '>' closes it before whitespace; otherwise it
    // is the less-than operator.
    Token angle(size_t line, size_t col) {
        size_t scan = pos_ + 1;
        bool is_iri = false;
        while (scan < text_.size()) {
            char c = text_[scan];
            if (c == '>') { is_iri = true; break; }
            if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '"')
                break;
            ++scan;
        }
        if (!is_iri) {
            take();
            if (peek() == '=') { take(); return tok(Tok::Le, "<=", line, col); }
            return tok(Tok::Lt, "<", line, col);
        }
        take();  // '<'
        std::string value;
        while (peek() != '>') value += take();
        take();  // '>'
        if (value.empty()) fail("empty IRI");
        return tok(Tok::Iri, std::move(value), line, col);
    }

    Token string_literal(size_t line, size_t col) {
        char quote = take();
        std::string value;
        for (;;) {
            if (eof()) fail("unterminated string literal");
            char c = take();
            if (c == quote) break;
            if (c == '\n') fail("newline in string literal");
            if (c != '\\') { value += c; continue; }
            if (eof()) fail("unterminated escape");
            char e = take();
            switch (e) {
                case 't': value += '\t'; break;
                case 'b': value += '\b'; break;
                case 'n': value += '\n'; break;
                case 'r': value += '\r'; break;
                case 'f': value += '\f'; break;
                case '"': value += '"'; break;
                case '\'': value += '\''; break;
                case '\\': value += '\\'; break;
                default: fail(std::string("invalid escape '\\") + e + "'");
            }
        }
        return tok(Tok::String, std::move(value), line, col);
    }

    Token variable(size_t line, size_t col) {
        take();  // '?' or '$'
        std::string name;
        while (name_char(peek())) name += take();
        if (name.empty()) fail("expected variable name");
        return tok(Tok::Var, std::move(name), line, col);
    }

    Token lang_tag(size_t line, size_t col) {
        take();  // '@'
        std::string tag;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')
            tag += take();
        if (tag.empty()) fail("expected language tag");
        return tok(Tok::LangTag, std::move(tag), line, col);
    }

    Token number(size_t line, size_t col) {
        std::string text;
        if (peek() == '+' || peek() == '-') text += take();
        while (std::isdigit(static_cast<unsigned char>(peek()))) text += take();
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            text += take();
            while (std::isdigit(static_cast<unsigned char>(peek()))) text += take();
        }
        if (peek() == 'e' || peek() == 'E') {
            size_t ahead = 1;
            if (peek(1) == '+' || peek(1) == '-') ahead = 2;
            if (std::isdigit(static_cast<unsigned char>(peek(ahead)))) {
                text += take();
                if (peek() == '+' || peek() == '-') text += take();
                while (std::isdigit(static_cast<unsigned char>(peek()))) text += take();
            }
        }
        return tok(Tok::Number, std::move(text), line, col);
    }

    Token word_or_pname(size_t line, size_t col) {
        if (peek() == '_' && peek(1) == ':')
            throw UnsupportedFeatureError("blank nodes in query patterns");
        std::string prefix;
        while (name_char(peek())) prefix += take();
        if (peek() != ':') {
            if (prefix.empty()) fail("unexpected character");
            return tok(Tok::Word, std::move(prefix), line, col);
        }
        take();  // ':'
        std::string local;
        while (pname_char(peek())) local += take();
        // trailing dots belong to the statement, not the name
        size_t chopped = 0;
        while (!local.empty() && local.back() == '.') { local.pop_back(); ++chopped; }
        pos_ -= chopped;
        col_ -= chopped;
        return tok(Tok::Pname, prefix + ":" + local, line, col);
    }
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

const std::set<std::string> kUnsupportedTopLevel = {
    "CONSTRUCT", "DESCRIBE", "INSERT", "DELETE", "LOAD", "CLEAR", "CREATE",
    "DROP", "COPY", "MOVE", "ADD", "WITH", "BASE"};

const std::set<std::string> kUnsupportedInGroup = {
    "SERVICE", "MINUS", "BIND", "VALUES", "GRAPH"};

const std::set<std::string> kUnsupportedAggregates = {
    "SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT"};

const std::set<std::string> kUnsupportedFilterFns = {
    "STR", "LANG", "LANGMATCHES", "DATATYPE", "IRI", "URI", "STRSTARTS",
    "STRENDS", "CONTAINS", "SUBSTR", "STRLEN", "UCASE", "LCASE", "ISIRI",
    "ISURI", "ISBLANK", "ISLITERAL", "ISNUMERIC", "SAMETERM", "EXISTS", "NOT",
    "IN", "IF", "COALESCE", "ABS", "CEIL", "FLOOR", "ROUND", "NOW", "YEAR"};

class Parser {
  public:
    explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

    Query parse() {
        prologue();
        Query q;
        const Token& t = peek();
        std::string kw = t.kind == Tok::Word ? upper(t.text) : "";
        if (kw == "SELECT") {
            q = select_query();
        } else if (kw == "ASK") {
            q = ask_query();
        } else if (kUnsupportedTopLevel.count(kw)) {
            throw UnsupportedFeatureError(kw + " queries");
        } else {
            fail(t, "expected SELECT or ASK");
        }
        expect_end();
        return q;
    }

  private:
    std::vector<Token> toks_;
    size_t i_ = 0;
    std::map<std::string, std::string> prefixes_;

    const Token& peek(size_t ahead = 0) const {
        size_t idx = std::min(i_ + ahead, toks_.size() - 1);
        return toks_[idx];
    }
    const Token& take() { return toks_[std::min(i_++, toks_.size() - 1)]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw QueryParseError(t.line, t.col, msg);
    }

    bool at_word(const char* kw) const {
        return peek().kind == Tok::Word && upper(peek().text) == kw;
    }
    void expect_word(const char* kw) {
        if (!at_word(kw)) fail(peek(), std::string("expected ") + kw);
        take();
    }
    void expect(Tok kind, const char* what) {
        if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
        take();
    }
    void expect_end() {
        if (peek().kind != Tok::End) fail(peek(), "unexpected trailing input");
    }

    void prologue() {
        while (at_word("PREFIX") || at_word("BASE")) {
            if (at_word("BASE")) throw UnsupportedFeatureError("BASE declarations");
            take();
            const Token& name = peek();
            if (name.kind != Tok::Pname) fail(name, "expected prefix name");
            std::string text = name.text;
            if (text.empty() || text.back() != ':')
                fail(name, "prefix declaration must end with ':'");
            take();
            const Token& iri = peek();
            if (iri.kind != Tok::Iri) fail(iri, "expected IRI in prefix declaration");
            prefixes_[text.substr(0, text.size() - 1)] = iri.text;
            take();
        }
    }

    std::string expand_pname(const Token& t) const {
        size_t colon = t.text.find(':');
        std::string prefix = t.text.substr(0, colon);
        auto it = prefixes_.find(prefix);
        if (it == prefixes_.end())
            fail(t, "unknown prefix '" + prefix + ":'");
        return it->second + t.text.substr(colon + 1);
    }

    Term number_term(const Token& t) const {
        if (t.text.find('e') != std::string::npos || t.text.find('E') != std::string::npos)
            return Term::literal(t.text, xsd::dbl);
        if (t.text.find('.') != std::string::npos)
            return Term::literal(t.text, xsd::decimal);
        return Term::literal(t.text, xsd::integer);
    }

    Term literal_term() {
        const Token& s = take();  // String
        if (peek().kind == Tok::LangTag) {
            return Term::literal(s.text, "", take().text);
        }
        if (peek().kind == Tok::HatHat) {
            take();
            const Token& dt = peek();
            if (dt.kind == Tok::Iri) { take(); return Term::literal(s.text, dt.text); }
            if (dt.kind == Tok::Pname) { take(); return Term::literal(s.text, expand_pname(dt)); }
            fail(dt, "expected datatype IRI");
        }
        return Term::literal(s.text);
    }

    // --- query forms ---

    Query select_query() {
        expect_word("SELECT");
        Query q;
        q.form = QueryForm::Select;
        if (at_word("DISTINCT")) { take(); q.modifiers.distinct = true; }
        else if (at_word("REDUCED")) throw UnsupportedFeatureError("REDUCED");

        if (peek().kind == Tok::Star) {
            take();
            q.select_all = true;
        } else {
            while (peek().kind == Tok::Var || peek().kind == Tok::LParen) {
                if (peek().kind == Tok::Var) {
                    q.projection.push_back(take().text);
                } else {
                    parse_count_column(q);
                }
            }
            if (q.projection.empty() && !q.count)
                fail(peek(), "SELECT needs variables, an aggregate, or *");
        }

        q.where = where_clause();
        modifiers(q);
        validate_select(q);
        return q;
    }

    void parse_count_column(Query& q) {
        expect(Tok::LParen, "'('");
        const Token& fn = peek();
        if (fn.kind != Tok::Word) fail(fn, "expected aggregate function");
        std::string name = upper(fn.text);
        if (kUnsupportedAggregates.count(name))
            throw UnsupportedFeatureError("aggregate " + name);
        if (name != "COUNT") fail(fn, "expected COUNT");
        if (q.count) throw UnsupportedFeatureError("multiple aggregates");
        take();
        expect(Tok::LParen, "'('");
        CountSpec spec;
        if (at_word("DISTINCT")) { take(); spec.distinct = true; }
        if (peek().kind == Tok::Star) {
            take();
        } else if (peek().kind == Tok::Var) {
            spec.arg_var = take().text;
        } else {
            fail(peek(), "expected * or variable in COUNT");
        }
        expect(Tok::RParen, "')'");
        expect_word("AS");
        if (peek().kind != Tok::Var) fail(peek(), "expected alias variable");
        spec.output_var = take().text;
        expect(Tok::RParen, "')'");
        q.count = std::move(spec);
    }

    Query ask_query() {
        expect_word("ASK");
        Query q;
        q.form = QueryForm::Ask;
        q.where = where_clause();
        return q;
    }

    PatternPtr where_clause() {
        if (at_word("WHERE")) take();
        if (at_word("FROM")) throw UnsupportedFeatureError("FROM clauses");
        return group();
    }

    // --- graph patterns ---

    PatternPtr group() {
        expect(Tok::LBrace, "'{'");
        PatternPtr current;
        std::vector<ExprPtr> filters;

        auto attach = [&](PatternPtr g) {
            current = current ? GraphPattern::join(std::move(current), std::move(g))
                              : std::move(g);
        };

        for (;;) {
            const Token& t = peek();
            if (t.kind == Tok::RBrace) { take(); break; }
            if (t.kind == Tok::End) fail(t, "unterminated group: expected '}'");

            if (t.kind == Tok::Word) {
                std::string kw = upper(t.text);
                if (kUnsupportedInGroup.count(kw)) throw UnsupportedFeatureError(kw);
                if (kw == "FILTER") {
                    take();
                    filters.push_back(constraint());
                    if (peek().kind == Tok::Dot) take();
                    continue;
                }
                if (kw == "OPTIONAL") {
                    take();
                    PatternPtr inner = group();
                    PatternPtr left = current ? std::move(current) : GraphPattern::bgp({});
                    current = GraphPattern::left_join(std::move(left), std::move(inner));
                    if (peek().kind == Tok::Dot) take();
                    continue;
                }
                if (kw == "SELECT") throw UnsupportedFeatureError("subqueries");
            }

            if (t.kind == Tok::LBrace) {
                PatternPtr g = group();
                while (at_word("UNION")) {
                    take();
                    if (peek().kind != Tok::LBrace) fail(peek(), "expected '{' after UNION");
                    g = GraphPattern::union_(std::move(g), group());
                }
                attach(std::move(g));
                if (peek().kind == Tok::Dot) take();
                continue;
            }

            attach(GraphPattern::bgp(triples_block()));
        }

        PatternPtr result = current ? std::move(current) : GraphPattern::bgp({});
        if (!filters.empty())
            result = GraphPattern::filter(std::move(result), std::move(filters));
        return result;
    }

    bool starts_term() const {
        switch (peek().kind) {
            case Tok::Var: case Tok::Iri: case Tok::Pname: case Tok::String:
            case Tok::Number:
                return true;
            case Tok::Word: {
                std::string kw = upper(peek().text);
                return kw == "TRUE" || kw == "FALSE";
            }
            default:
                return false;
        }
    }

    std::vector<TriplePattern> triples_block() {
        std::vector<TriplePattern> out;
        for (;;) {
            triples_same_subject(out);
            if (peek().kind != Tok::Dot) break;
            take();
            if (!starts_term()) break;
        }
        return out;
    }

    void triples_same_subject(std::vector<TriplePattern>& out) {
        if (peek().kind == Tok::LBracket)
            throw UnsupportedFeatureError("blank node property lists");
        if (!starts_term()) fail(peek(), "expected triple pattern");
        TermOrVar subject = term_or_var();
        for (;;) {
            TermOrVar predicate = verb();
            for (;;) {
                TermOrVar object = term_or_var();
                out.push_back(TriplePattern{subject, predicate, object});
                if (peek().kind != Tok::Comma) break;
                take();
            }
            if (peek().kind != Tok::Semicolon) break;
            take();
            if (!starts_term() && !at_word("A")) break;  // trailing ';'
        }
    }

    TermOrVar verb() {
        const Token& t = peek();
        if (t.kind == Tok::Word && upper(t.text) == "A") {
            take();
            check_path_operator();
            return Term::iri(rdf_type);
        }
        if (t.kind == Tok::Var) { take(); return Variable{t.text}; }
        if (t.kind == Tok::Iri) {
            take();
            check_path_operator();
            return Term::iri(t.text);
        }
        if (t.kind == Tok::Pname) {
            std::string iri = expand_pname(t);
            take();
            check_path_operator();
            return Term::iri(iri);
        }
        if (t.kind == Tok::Caret || t.kind == Tok::LParen || t.kind == Tok::Bang)
            throw UnsupportedFeatureError("property paths");
        fail(t, "expected predicate");
    }

    void check_path_operator() const {
        switch (peek().kind) {
            case Tok::Slash: case Tok::Pipe: case Tok::Plus: case Tok::Star:
            case Tok::Caret:
                throw UnsupportedFeatureError("property paths");
            default:
                return;
        }
    }

    TermOrVar term_or_var() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Var: take(); return Variable{t.text};
            case Tok::Iri: take(); return Term::iri(t.text);
            case Tok::Pname: { std::string iri = expand_pname(t); take(); return Term::iri(iri); }
            case Tok::String:
                return literal_term();  // literal subjects parse but never match
            case Tok::Number: take(); return number_term(t);
            case Tok::Word: {
                std::string kw = upper(t.text);
                if (kw == "TRUE") { take(); return Term::literal("true", xsd::boolean); }
                if (kw == "FALSE") { take(); return Term::literal("false", xsd::boolean); }
                fail(t, "unexpected keyword in triple pattern");
            }
            case Tok::LParen:
                throw UnsupportedFeatureError("RDF collections");
            case Tok::LBracket:
                throw UnsupportedFeatureError("blank node property lists");
            default:
                fail(t, "expected term or variable");
        }
    }

    // --- filter expressions ---

    ExprPtr constraint() {
        const Token& t = peek();
        if (t.kind == Tok::LParen) {
            take();
            ExprPtr e = expression();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (t.kind == Tok::Word) return builtin_call();
        fail(t, "expected FILTER constraint");
    }

    ExprPtr builtin_call() {
        const Token& t = peek();
        std::string name = upper(t.text);
        if (name == "REGEX") {
            take();
            expect(Tok::LParen, "'('");
            ExprPtr text = expression();
            expect(Tok::Comma, "','");
            if (peek().kind != Tok::String) fail(peek(), "regex pattern must be a string");
            std::string pattern = take().text;
            std::string flags;
            if (peek().kind == Tok::Comma) {
                take();
                if (peek().kind != Tok::String) fail(peek(), "regex flags must be a string");
                flags = take().text;
            }
            expect(Tok::RParen, "')'");
            return Expr::regex(std::move(text), std::move(pattern), std::move(flags));
        }
        if (name == "BOUND") {
            take();
            expect(Tok::LParen, "'('");
            if (peek().kind != Tok::Var) fail(peek(), "bound() takes a variable");
            std::string var = take().text;
            expect(Tok::RParen, "')'");
            return Expr::bound(std::move(var));
        }
        if (kUnsupportedFilterFns.count(name))
            throw UnsupportedFeatureError("FILTER function " + name);
        fail(t, "unknown FILTER function '" + t.text + "'");
    }

    ExprPtr expression() { return or_expr(); }

    ExprPtr or_expr() {
        ExprPtr e = and_expr();
        while (peek().kind == Tok::OrOr) {
            take();
            e = Expr::logical_or(std::move(e), and_expr());
        }
        return e;
    }

    ExprPtr and_expr() {
        ExprPtr e = rel_expr();
        while (peek().kind == Tok::AndAnd) {
            take();
            e = Expr::logical_and(std::move(e), rel_expr());
        }
        return e;
    }

    ExprPtr rel_expr() {
        ExprPtr left = unary_expr();
        Expr::CmpOp op;
        switch (peek().kind) {
            case Tok::Eq: op = Expr::CmpOp::Eq; break;
            case Tok::Ne: op = Expr::CmpOp::Ne; break;
            case Tok::Lt: op = Expr::CmpOp::Lt; break;
            case Tok::Le: op = Expr::CmpOp::Le; break;
            case Tok::Gt: op = Expr::CmpOp::Gt; break;
            case Tok::Ge: op = Expr::CmpOp::Ge; break;
            default: return left;
        }
        take();
        return Expr::cmp(op, std::move(left), unary_expr());
    }

    ExprPtr unary_expr() {
        if (peek().kind == Tok::Bang) {
            take();
            return Expr::logical_not(unary_expr());
        }
        return primary_expr();
    }

    ExprPtr primary_expr() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::LParen: {
                take();
                ExprPtr e = expression();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Var: take(); return Expr::variable(t.text);
            case Tok::Number: take(); return Expr::constant(number_term(t));
            case Tok::String: return Expr::constant(literal_term());
            case Tok::Iri: take(); return Expr::constant(Term::iri(t.text));
            case Tok::Pname: {
                std::string iri = expand_pname(t);
                take();
                return Expr::constant(Term::iri(iri));
            }
            case Tok::Word: {
                std::string kw = upper(t.text);
                if (kw == "TRUE") { take(); return Expr::constant(Term::literal("true", xsd::boolean)); }
                if (kw == "FALSE") { take(); return Expr::constant(Term::literal("false", xsd::boolean)); }
                return builtin_call();
            }
            default:
                fail(t, "expected expression");
        }
    }

    // --- solution modifiers ---

    void modifiers(Query& q) {
        bool saw_group = false, saw_order = false, saw_limit = false, saw_offset = false;
        for (;;) {
            if (at_word("GROUP")) {
                if (saw_group) fail(peek(), "duplicate GROUP BY");
                if (saw_order || saw_limit || saw_offset)
                    fail(peek(), "GROUP BY must precede other modifiers");
                saw_group = true;
                take();
                expect_word("BY");
                if (peek().kind != Tok::Var) fail(peek(), "expected GROUP BY variable");
                while (peek().kind == Tok::Var) q.modifiers.group_by.push_back(take().text);
                continue;
            }
            if (at_word("HAVING")) throw UnsupportedFeatureError("HAVING");
            if (at_word("ORDER")) {
                if (saw_order) fail(peek(), "duplicate ORDER BY");
                saw_order = true;
                take();
                expect_word("BY");
                bool any = false;
                for (;;) {
                    if (peek().kind == Tok::Var) {
                        q.modifiers.order_by.push_back({take().text, true});
                        any = true;
                    } else if (at_word("ASC") || at_word("DESC")) {
                        bool asc = upper(take().text) == "ASC";
                        expect(Tok::LParen, "'('");
                        if (peek().kind != Tok::Var) fail(peek(), "expected variable");
                        q.modifiers.order_by.push_back({take().text, asc});
                        expect(Tok::RParen, "')'");
                        any = true;
                    } else {
                        break;
                    }
                }
                if (!any) fail(peek(), "expected ORDER BY key");
                continue;
            }
            if (at_word("LIMIT")) {
                if (saw_limit) fail(peek(), "duplicate LIMIT");
                saw_limit = true;
                take();
                q.modifiers.limit = non_negative_integer("LIMIT");
                continue;
            }
            if (at_word("OFFSET")) {
                if (saw_offset) fail(peek(), "duplicate OFFSET");
                saw_offset = true;
                take();
                q.modifiers.offset = non_negative_integer("OFFSET");
                continue;
            }
            return;
        }
    }

    std::uint64_t non_negative_integer(const char* what) {
        const Token& t = peek();
        if (t.kind != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos)
            fail(t, std::string(what) + " takes a non-negative integer");
        take();
        return std::stoull(t.text);
    }

    void validate_select(const Query& q) const {
        auto in = [](const std::vector<std::string>& v, const std::string& s) {
            return std::find(v.begin(), v.end(), s) != v.end();
        };
        if (q.count) {
            const auto pattern_vars = q.where->variables();
            if (in(pattern_vars, q.count->output_var))
                fail(toks_.front(), "COUNT alias ?" + q.count->output_var +
                                        " already bound in the pattern");
            if (q.select_all)
                fail(toks_.front(), "SELECT * cannot be combined with COUNT");
        }
        if (!q.modifiers.group_by.empty() || q.count) {
            for (const std::string& v : q.projection)
                if (!in(q.modifiers.group_by, v))
                    fail(toks_.front(),
                         "projected variable ?" + v + " must appear in GROUP BY");
            if (q.select_all && !q.modifiers.group_by.empty())
                fail(toks_.front(), "SELECT * cannot be combined with GROUP BY");
        }
    }
};

}  // namespace

Query parse_query(std::string_view text) { return Parser(text).parse(); }

}  // namespace fedmesh
