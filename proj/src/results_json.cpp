#include "fedmesh/results_json.hpp"

#include <json.hpp>

#include "fedmesh/errors.hpp"

namespace fedmesh {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json term_to_json(const Term& t) {
    ordered_json j;
    switch (t.kind) {
        case TermKind::Iri:
            j["type"] = "uri";
            j["value"] = t.lexical;
            break;
        case TermKind::BlankNode:
            j["type"] = "bnode";
            j["value"] = t.lexical;
            break;
        case TermKind::Literal:
            j["type"] = "literal";
            j["value"] = t.lexical;
            if (!t.language.empty()) j["xml:lang"] = t.language;
            if (!t.datatype.empty()) j["datatype"] = t.datatype;
            break;
    }
    return j;
}

Term term_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("type") || !j.contains("value"))
        throw Error("results JSON: binding is not a term object");
    const std::string type = j["type"].get<std::string>();
    const std::string value = j["value"].get<std::string>();
    if (type == "uri") return Term::iri(value);
    if (type == "bnode") return Term::blank(value);
    if (type == "literal" || type == "typed-literal") {
        std::string datatype, language;
        if (j.contains("datatype")) datatype = j["datatype"].get<std::string>();
        if (j.contains("xml:lang")) language = j["xml:lang"].get<std::string>();
        return Term::literal(value, datatype, language);
    }
    throw Error("results JSON: unknown term type '" + type + "'");
}

}  // namespace

std::string serialize_results(const SolutionSeq& seq) {
    ordered_json doc;
    doc["head"] = ordered_json::object();
    if (seq.is_ask()) {
        doc["boolean"] = *seq.boolean;
        return doc.dump();
    }
    doc["head"]["vars"] = seq.vars;
    ordered_json bindings = ordered_json::array();
    for (const BindingRow& row : seq.rows) {
        ordered_json b = ordered_json::object();
        for (const auto& [var, term] : row) b[var] = term_to_json(term);
        bindings.push_back(std::move(b));
    }
    doc["results"]["bindings"] = std::move(bindings);
    return doc.dump();
}

SolutionSeq parse_results(std::string_view json_text) {
    ordered_json doc = ordered_json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw Error("results JSON: malformed document");

    SolutionSeq seq;
    if (doc.contains("boolean")) {
        if (!doc["boolean"].is_boolean())
            throw Error("results JSON: boolean must be true or false");
        seq.boolean = doc["boolean"].get<bool>();
        return seq;
    }
    if (!doc.contains("results") || !doc["results"].contains("bindings"))
        throw Error("results JSON: missing results.bindings");
    if (doc.contains("head") && doc["head"].contains("vars")) {
        for (const auto& v : doc["head"]["vars"])
            seq.vars.push_back(v.get<std::string>());
    }
    for (const auto& b : doc["results"]["bindings"]) {
        if (!b.is_object()) throw Error("results JSON: binding row is not an object");
        BindingRow row;
        for (auto it = b.begin(); it != b.end(); ++it)
            row.set(it.key(), term_from_json(it.value()));
        seq.rows.push_back(std::move(row));
    }
    return seq;
}

}  // namespace fedmesh
