#include "fedmesh/plan.hpp"

#include <algorithm>
#include <utility>

#include <json.hpp>

#include "fedmesh/sparql_text.hpp"

namespace fedmesh {

namespace {

std::shared_ptr<PlanNode> make(PlanNode::Kind kind) {
    auto node = std::make_shared<PlanNode>();
    node->kind = kind;
    return node;
}

void push_unique(std::vector<std::string>& out, const std::string& name) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
}

void collect_vars(const PlanNode& node, std::vector<std::string>& out) {
    switch (node.kind) {
        case PlanNode::Kind::Empty:
            break;
        case PlanNode::Kind::Pattern:
            for (const auto& v : node.pattern.variables()) push_unique(out, v);
            break;
        case PlanNode::Kind::ExclusiveGroup:
            for (const auto& p : node.patterns)
                for (const auto& v : p.variables()) push_unique(out, v);
            break;
        default:
            for (const auto& child : node.children) collect_vars(*child, out);
            break;
    }
}

void collect_patterns(const PlanNode& node, std::vector<TriplePattern>& out) {
    switch (node.kind) {
        case PlanNode::Kind::Empty:
            break;
        case PlanNode::Kind::Pattern:
            out.push_back(node.pattern);
            break;
        case PlanNode::Kind::ExclusiveGroup:
            out.insert(out.end(), node.patterns.begin(), node.patterns.end());
            break;
        default:
            for (const auto& child : node.children) collect_patterns(*child, out);
            break;
    }
}

}  // namespace

PlanPtr PlanNode::empty(std::string reason) {
    auto node = make(Kind::Empty);
    node->empty_reason = std::move(reason);
    return node;
}

PlanPtr PlanNode::leaf(TriplePattern pattern, std::vector<std::string> sources) {
    auto node = make(Kind::Pattern);
    node->pattern = std::move(pattern);
    node->sources = std::move(sources);
    return node;
}

PlanPtr PlanNode::exclusive_group(std::vector<TriplePattern> patterns, std::string source,
                                  std::vector<ExprPtr> filters) {
    auto node = make(Kind::ExclusiveGroup);
    node->patterns = std::move(patterns);
    node->source = std::move(source);
    node->filters = std::move(filters);
    return node;
}

PlanPtr PlanNode::join(std::vector<PlanPtr> children) {
    auto node = make(Kind::Join);
    node->children = std::move(children);
    return node;
}

PlanPtr PlanNode::union_(PlanPtr left, PlanPtr right) {
    auto node = make(Kind::Union);
    node->children = {std::move(left), std::move(right)};
    return node;
}

PlanPtr PlanNode::left_join(PlanPtr left, PlanPtr right, bool seed_safe) {
    auto node = make(Kind::LeftJoin);
    node->children = {std::move(left), std::move(right)};
    node->seed_safe = seed_safe;
    return node;
}

PlanPtr PlanNode::filter(PlanPtr child, std::vector<ExprPtr> filters, bool seed_safe) {
    auto node = make(Kind::Filter);
    node->children = {std::move(child)};
    node->filters = std::move(filters);
    node->seed_safe = seed_safe;
    return node;
}

std::vector<std::string> PlanNode::variables() const {
    std::vector<std::string> out;
    collect_vars(*this, out);
    return out;
}

std::vector<TriplePattern> PlanNode::all_patterns() const {
    std::vector<TriplePattern> out;
    collect_patterns(*this, out);
    return out;
}

std::string PlanNode::describe() const {
    switch (kind) {
        case Kind::Empty:
            return "Empty";
        case Kind::Pattern:
            return "Pattern{" + std::to_string(sources.size()) + "}";
        case Kind::ExclusiveGroup:
            return "EG[" + std::to_string(patterns.size()) + "]@" + source;
        default:
            break;
    }
    std::string name = kind == Kind::Join    ? "Join"
                       : kind == Kind::Union ? "Union"
                       : kind == Kind::LeftJoin ? "LeftJoin"
                                                : "Filter";
    std::string out = name + "(";
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i > 0) out += ", ";
        out += children[i]->describe();
    }
    return out + ")";
}

std::string ExecutionTrace::to_json() const {
    nlohmann::ordered_json doc;
    doc["ask_requests"] = ask_requests;
    doc["select_requests"] = select_requests;
    doc["total_requests"] = total_requests();
    doc["ask_saved"] = ask_saved;
    doc["elapsed_ms"] = elapsed_ms;
    doc["per_endpoint"] = nlohmann::ordered_json::object();
    for (const auto& [id, n] : per_endpoint_select) {
        doc["per_endpoint"][id]["select"] = n;
    }
    for (const auto& [id, n] : per_endpoint_ask) {
        doc["per_endpoint"][id]["ask"] = n;
    }
    doc["relevant_per_pattern"] = relevant_per_pattern;
    if (!short_circuits.empty()) doc["short_circuits"] = short_circuits;
    if (!unreachable_members.empty()) doc["unreachable_members"] = unreachable_members;
    return doc.dump(2);
}

}  // namespace fedmesh
