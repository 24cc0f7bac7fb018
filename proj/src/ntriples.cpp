#include "fedmesh/ntriples.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace fedmesh {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no)
        : line_(line), line_no_(line_no) {}

    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t start = pos_ < line_.size() ? pos_ : (line_.empty() ? 0 : line_.size() - 1);
        std::string fragment(line_.substr(start, 24));
        throw NtParseError(line_no_, fragment, msg);
    }

    void skip_ws() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    }

    bool at_end() const { return pos_ >= line_.size(); }
    char peek() const { return pos_ < line_.size() ? line_[pos_] : '\0'; }
    char take() { return line_[pos_++]; }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::uint32_t hex_escape(int digits) {
        std::uint32_t cp = 0;
        for (int i = 0; i < digits; ++i) {
            if (at_end()) fail("truncated \\u escape");
            char c = take();
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<std::uint32_t>(c - 'A' + 10);
            else fail("bad hex digit in escape");
        }
        return cp;
    }

    std::string quoted_string() {
        if (!consume('"')) fail("expected '\"'");
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated string literal");
            char c = take();
            if (c == '"') break;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (at_end()) fail("truncated escape");
            char e = take();
            switch (e) {
                case 't': out.push_back('\t'); break;
                case 'b': out.push_back('\b'); break;
                case 'n': out.push_back('\n'); break;
                case 'r': out.push_back('\r'); break;
                case 'f': out.push_back('\f'); break;
                case '"': out.push_back('"'); break;
                case '\'': out.push_back('\''); break;
                case '\\': out.push_back('\\'); break;
                case 'u': append_utf8(out, hex_escape(4)); break;
                case 'U': append_utf8(out, hex_escape(8)); break;
                default: fail(std::string("unknown escape '\\") + e + "'");
            }
        }
        return out;
    }

    std::string iri_ref() {
        if (!consume('<')) fail("expected '<'");
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated IRI");
            char c = take();
            if (c == '>') break;
            if (c == ' ' || c == '\t' || c == '<' || c == '"' || c == '{' || c == '}' ||
                c == '|' || c == '^' || c == '`')
                fail("character not allowed in IRI");
            if (c == '\\') {
                if (at_end()) fail("truncated escape");
                char e = take();
                if (e == 'u') append_utf8(out, hex_escape(4));
                else if (e == 'U') append_utf8(out, hex_escape(8));
                else fail("bad IRI escape");
                continue;
            }
            out.push_back(c);
        }
        if (out.empty()) fail("empty IRI");
        return out;
    }

    std::string bnode_label() {
        // Caller consumed "_:".
        std::string out;
        while (!at_end()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                c == '.') {
                out.push_back(take());
            } else {
                break;
            }
        }
        while (!out.empty() && out.back() == '.') {  // trailing dot is the statement end
            out.pop_back();
            --pos_;
        }
        if (out.empty()) fail("empty blank node label");
        return out;
    }

    std::string lang_tag() {
        // Caller consumed "@".
        std::string out;
        while (!at_end()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') out.push_back(take());
            else break;
        }
        if (out.empty()) fail("empty language tag");
        return out;
    }

    Term term(const std::string& doc_id, bool allow_literal) {
        skip_ws();
        char c = peek();
        if (c == '<') return Term::iri(iri_ref());
        if (c == '_') {
            take();
            if (!consume(':')) fail("expected ':' after '_'");
            std::string label = bnode_label();
            if (!doc_id.empty()) label = doc_id + "." + label;
            return Term::blank(label);
        }
        if (c == '"') {
            if (!allow_literal) fail("literal not allowed in this position");
            std::string lex = quoted_string();
            if (consume('@')) return Term::literal(std::move(lex), "", lang_tag());
            if (peek() == '^') {
                take();
                if (!consume('^')) fail("expected '^^'");
                return Term::literal(std::move(lex), iri_ref());
            }
            return Term::literal(std::move(lex));
        }
        fail("expected IRI, blank node, or literal");
    }

    void statement_end() {
        skip_ws();
        if (!consume('.')) fail("expected '.' terminating statement");
        skip_ws();
        if (!at_end() && peek() != '#') fail("trailing content after '.'");
    }

private:
    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

bool blank_or_comment(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (c != ' ' && c != '\t') return false;
    }
    return true;
}

}  // namespace

std::vector<Triple> parse_ntriples(std::string_view input, const std::string& doc_id) {
    std::vector<Triple> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= input.size()) {
        if (start == input.size()) break;
        std::size_t nl = input.find('\n', start);
        std::string_view line = input.substr(
            start, nl == std::string_view::npos ? input.size() - start : nl - start);
        start = nl == std::string_view::npos ? input.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (blank_or_comment(line)) continue;

        LineParser p(line, line_no);
        Term subject = p.term(doc_id, false);
        if (subject.is_literal()) p.fail("subject must not be a literal");
        p.skip_ws();
        Term predicate = p.term(doc_id, false);
        if (!predicate.is_iri()) p.fail("predicate must be an IRI");
        Term object = p.term(doc_id, true);
        p.statement_end();
        out.emplace_back(std::move(subject), std::move(predicate), std::move(object));
    }
    return out;
}

std::vector<Triple> parse_ntriples_file(const std::filesystem::path& path,
                                        const std::string& doc_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ntriples(buf.str(), doc_id);
}

std::vector<Triple> parse_ntriples_file(const std::filesystem::path& path) {
    return parse_ntriples_file(path, path.stem().string());
}

std::size_t load_ntriples_file(Store& store, const std::filesystem::path& path) {
    auto triples = parse_ntriples_file(path);
    for (const Triple& t : triples) store.insert(t);
    return triples.size();
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
}

}  // namespace

std::string serialize_term_nt(const Term& t) {
    std::string out;
    switch (t.kind) {
        case TermKind::Iri:
            out = "<" + t.lexical + ">";
            break;
        case TermKind::BlankNode:
            out = "_:" + t.lexical;
            break;
        case TermKind::Literal:
            out.push_back('"');
            append_escaped(out, t.lexical);
            out.push_back('"');
            if (!t.language.empty()) {
                out += "@" + t.language;
            } else if (!t.datatype.empty()) {
                out += "^^<" + t.datatype + ">";
            }
            break;
    }
    return out;
}

std::string serialize_triple_nt(const Triple& t) {
    return serialize_term_nt(t.subject) + " " + serialize_term_nt(t.predicate) + " " +
           serialize_term_nt(t.object) + " .";
}

std::string serialize_ntriples(std::span<const Triple> triples) {
    std::string out;
    for (const Triple& t : triples) {
        out += serialize_triple_nt(t);
        out.push_back('\n');
    }
    return out;
}

}  // namespace fedmesh
