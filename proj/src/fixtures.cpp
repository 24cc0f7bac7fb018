#include "fedmesh/fixtures.hpp"

#include <cstdio>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "fedmesh/bench.hpp"
#include "fedmesh/errors.hpp"
#include "fedmesh/eval.hpp"
#include "fedmesh/ntriples.hpp"
#include "fedmesh/rng.hpp"
#include "fedmesh/sparql_parser.hpp"

namespace fedmesh {

namespace {

const std::string kV = "http://fedmesh.dev/vocab/";
const std::string kC = "http://fedmesh.dev/class/";
const std::string kCat = "http://fedmesh.dev/category/";
const std::string kRoot = "http://fedmesh.dev/";
const std::string kNoise = "http://fedmesh.dev/noise/";

// Entity populations are fixed so cross-role references (drug -> protein,
// protein -> gene, disease -> gene) always resolve, whatever the member
// count. Sized for desk-scale joins: selective enough that bound-join
// fan-outs stay in the hundreds.
constexpr std::size_t kGenes = 120;
constexpr std::size_t kProteins = 150;
constexpr std::size_t kPathways = 40;
constexpr std::size_t kDrugs = 80;
constexpr std::size_t kDiseases = 60;
constexpr std::size_t kRoleCount = 5;

Term iri(std::string s) { return Term::iri(std::move(s)); }
Term lit(std::string s) { return Term::literal(std::move(s)); }
Term num(std::uint64_t n) { return Term::literal(std::to_string(n), xsd::integer); }

Term gene(std::size_t n) { return iri(kRoot + "gene/G" + std::to_string(n)); }
Term protein(std::size_t n) { return iri(kRoot + "protein/P" + std::to_string(n)); }
Term pathway(std::size_t n) { return iri(kRoot + "pathway/Pw" + std::to_string(n)); }
Term drug(std::size_t n) { return iri(kRoot + "drug/D" + std::to_string(n)); }
Term disease(std::size_t n) { return iri(kRoot + "disease/Dis" + std::to_string(n)); }
Term vocab(const char* name) { return iri(kV + name); }
Term klass(const char* name) { return iri(kC + name); }
Term category(const std::string& name) { return iri(kCat + name); }
Term a() { return iri(rdf_type); }

SplitMix64 entity_rng(std::uint64_t seed, int role, std::size_t entity) {
    return SplitMix64(SplitMix64::mix(SplitMix64::mix(seed, static_cast<std::uint64_t>(role)),
                                      static_cast<std::uint64_t>(entity)));
}

const char* const kChromosomes[] = {"chr1", "chr2", "chr3", "chr4", "chr5",
                                    "chr6", "chr7", "chr8", "chrX", "chrY"};

// Entities 0 and 1 are anchors with fixed triples; together with the other
// roles' anchors they guarantee every corpus query a non-empty answer for
// any seed. G1 is the chrY gene the chromosome queries pivot on.
void gene_record(std::vector<Triple>& out, std::uint64_t seed, std::size_t g) {
    const Term s = gene(g);
    if (g == 0) {
        out.emplace_back(s, a(), klass("Gene"));
        out.emplace_back(s, vocab("name"), lit("gene G0"));
        out.emplace_back(s, vocab("label"), lit("G0"));
        out.emplace_back(s, vocab("chromosome"), lit("chr1"));
        out.emplace_back(s, vocab("category"), category("g0"));
        return;
    }
    if (g == 1) {
        out.emplace_back(s, a(), klass("Gene"));
        out.emplace_back(s, vocab("name"), lit("gene G1"));
        out.emplace_back(s, vocab("chromosome"), lit("chrY"));
        out.emplace_back(s, vocab("category"), category("g1"));
        return;
    }
    SplitMix64 rng = entity_rng(seed, 0, g);
    out.emplace_back(s, a(), klass("Gene"));
    out.emplace_back(s, vocab("name"), lit("gene G" + std::to_string(g)));
    out.emplace_back(s, vocab("chromosome"), lit(kChromosomes[rng.below(10)]));
    out.emplace_back(s, vocab("category"), category("g" + std::to_string(rng.below(6))));
    if (rng.unit() < 0.5) out.emplace_back(s, vocab("label"), lit("G" + std::to_string(g)));
}

// P7 and P15 anchor the interaction and drug-target chains.
void protein_record(std::vector<Triple>& out, std::uint64_t seed, std::size_t p) {
    const Term s = protein(p);
    if (p == 7) {
        out.emplace_back(s, a(), klass("Protein"));
        out.emplace_back(s, vocab("name"), lit("protein P7"));
        out.emplace_back(s, vocab("mass"), num(51234));
        out.emplace_back(s, vocab("encodedBy"), gene(0));
        out.emplace_back(s, vocab("confidence"), num(60));
        return;
    }
    if (p == 15) {
        out.emplace_back(s, a(), klass("Protein"));
        out.emplace_back(s, vocab("name"), lit("protein P15"));
        out.emplace_back(s, vocab("mass"), num(63217));
        out.emplace_back(s, vocab("encodedBy"), gene(1));
        out.emplace_back(s, vocab("confidence"), num(85));
        return;
    }
    SplitMix64 rng = entity_rng(seed, 1, p);
    out.emplace_back(s, a(), klass("Protein"));
    out.emplace_back(s, vocab("name"), lit("protein P" + std::to_string(p)));
    out.emplace_back(s, vocab("mass"), num(10000 + rng.below(80000)));
    out.emplace_back(s, vocab("encodedBy"), gene(rng.below(kGenes)));
    out.emplace_back(s, vocab("confidence"), num(rng.below(101)));
}

// Role 2 keys proteins by their index and pathways by kProteins + index.
// The anchor edges make P15 <-> P7 mutual and route both through Pw5, which
// closes the two-hop interaction chains.
void interaction_record(std::vector<Triple>& out, std::uint64_t seed, std::size_t e) {
    if (e < kProteins) {
        const std::size_t p = e;
        const Term s = protein(p);
        if (p == 7) {
            out.emplace_back(s, vocab("interactsWith"), protein(15));
            out.emplace_back(s, vocab("involvedIn"), pathway(5));
            return;
        }
        if (p == 15) {
            out.emplace_back(s, vocab("interactsWith"), protein(7));
            out.emplace_back(s, vocab("involvedIn"), pathway(5));
            return;
        }
        SplitMix64 rng = entity_rng(seed, 2, e);
        const std::size_t degree = 1 + rng.below(2);
        for (std::size_t i = 0; i < degree; ++i) {
            out.emplace_back(s, vocab("interactsWith"), protein(rng.below(kProteins)));
        }
        if (rng.unit() < 0.6) {
            out.emplace_back(s, vocab("involvedIn"), pathway(rng.below(kPathways)));
        }
        return;
    }
    const std::size_t w = e - kProteins;
    const Term s = pathway(w);
    if (w == 5) {
        out.emplace_back(s, vocab("name"), lit("pathway Pw5"));
        out.emplace_back(s, vocab("label"), lit("Pw5"));
        out.emplace_back(s, vocab("involves"), protein(7));
        out.emplace_back(s, vocab("involves"), protein(15));
        return;
    }
    SplitMix64 rng = entity_rng(seed, 2, e);
    out.emplace_back(s, vocab("name"), lit("pathway Pw" + std::to_string(w)));
    if (rng.unit() < 0.4) out.emplace_back(s, vocab("label"), lit("Pw" + std::to_string(w)));
    const std::size_t involved = 2 + rng.below(3);
    for (std::size_t i = 0; i < involved; ++i) {
        out.emplace_back(s, vocab("involves"), protein(rng.below(kProteins)));
    }
}

// D42 (category c3, phase 3, targets P15) drives the drug-anchored chains;
// it deliberately has no indication so optional clauses exercise the
// unbound arm. D7 is the category-c2 counterpart with one.
void drug_record(std::vector<Triple>& out, std::uint64_t seed, std::size_t d) {
    const Term s = drug(d);
    if (d == 7) {
        out.emplace_back(s, a(), klass("Drug"));
        out.emplace_back(s, vocab("name"), lit("drug D7"));
        out.emplace_back(s, vocab("category"), category("c2"));
        out.emplace_back(s, vocab("phase"), num(2));
        out.emplace_back(s, vocab("indication"), lit("indication 7"));
        out.emplace_back(s, vocab("targets"), protein(7));
        return;
    }
    if (d == 42) {
        out.emplace_back(s, a(), klass("Drug"));
        out.emplace_back(s, vocab("name"), lit("drug D42"));
        out.emplace_back(s, vocab("category"), category("c3"));
        out.emplace_back(s, vocab("phase"), num(3));
        out.emplace_back(s, vocab("targets"), protein(15));
        return;
    }
    SplitMix64 rng = entity_rng(seed, 3, d);
    out.emplace_back(s, a(), klass("Drug"));
    out.emplace_back(s, vocab("name"), lit("drug D" + std::to_string(d)));
    out.emplace_back(s, vocab("category"), category("c" + std::to_string(rng.below(5))));
    out.emplace_back(s, vocab("phase"), num(rng.below(4)));
    if (rng.unit() < 0.6) {
        out.emplace_back(s, vocab("indication"),
                         lit("indication " + std::to_string(rng.below(30))));
    }
    const std::size_t targets = 1 + rng.below(2);
    for (std::size_t i = 0; i < targets; ++i) {
        out.emplace_back(s, vocab("targets"), protein(rng.below(kProteins)));
    }
}

// Dis3 links category c1 to G1, completing the disease-to-drug chain
// through P15 and D42.
void disease_record(std::vector<Triple>& out, std::uint64_t seed, std::size_t n) {
    const Term s = disease(n);
    if (n == 3) {
        out.emplace_back(s, vocab("name"), lit("disease Dis3"));
        out.emplace_back(s, vocab("label"), lit("Dis3"));
        out.emplace_back(s, vocab("associatedGene"), gene(1));
        out.emplace_back(s, vocab("classifiedAs"), category("c1"));
        return;
    }
    if (n == 7) {
        out.emplace_back(s, vocab("name"), lit("disease Dis7"));
        out.emplace_back(s, vocab("associatedGene"), gene(0));
        out.emplace_back(s, vocab("classifiedAs"), category("c2"));
        return;
    }
    SplitMix64 rng = entity_rng(seed, 4, n);
    out.emplace_back(s, vocab("name"), lit("disease Dis" + std::to_string(n)));
    const std::size_t genes = 1 + rng.below(2);
    for (std::size_t i = 0; i < genes; ++i) {
        out.emplace_back(s, vocab("associatedGene"), gene(rng.below(kGenes)));
    }
    out.emplace_back(s, vocab("classifiedAs"), category("c" + std::to_string(rng.below(3))));
    if (rng.unit() < 0.4) out.emplace_back(s, vocab("label"), lit("Dis" + std::to_string(n)));
}

std::size_t role_population(int role) {
    switch (role) {
        case 0: return kGenes;
        case 1: return kProteins;
        case 2: return kProteins + kPathways;
        case 3: return kDrugs;
        case 4: return kDiseases;
    }
    return 0;
}

std::vector<Triple> role_record(std::uint64_t seed, int role, std::size_t entity) {
    std::vector<Triple> out;
    switch (role) {
        case 0: gene_record(out, seed, entity); break;
        case 1: protein_record(out, seed, entity); break;
        case 2: interaction_record(out, seed, entity); break;
        case 3: drug_record(out, seed, entity); break;
        case 4: disease_record(out, seed, entity); break;
    }
    return out;
}

std::string member_name(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "m%02zu", index);
    return buf;
}

}  // namespace

Fixtures generate_fixtures(const FixtureSpec& spec) {
    if (spec.members == 0) throw ConfigError("fixture federation needs at least one member");
    Fixtures fx;
    fx.spec = spec;
    fx.stores.resize(spec.members);
    fx.member_ids.reserve(spec.members);
    for (std::size_t i = 0; i < spec.members; ++i) fx.member_ids.push_back(member_name(i));

    std::vector<std::vector<std::size_t>> slots_by_role(kRoleCount);
    for (std::size_t i = 0; i < spec.members; ++i) slots_by_role[i % kRoleCount].push_back(i);

    for (int role = 0; role < static_cast<int>(kRoleCount); ++role) {
        const auto& slots = slots_by_role[role];
        if (slots.empty()) continue;
        const std::size_t population = role_population(role);
        for (std::size_t e = 0; e < population; ++e) {
            const std::vector<Triple> record = role_record(spec.seed, role, e);
            for (const Triple& t : record) fx.stores[slots[e % slots.size()]].insert(t);
            if (spec.overlap && slots.size() > 1) {
                Store& twin = fx.stores[slots[(e + 1) % slots.size()]];
                for (const Triple& t : record) twin.insert(t);
            }
        }
    }

    // Noise subjects embed the member id, so padding never joins across
    // members and never widens a domain query's answer.
    for (std::size_t i = 0; i < spec.members; ++i) {
        SplitMix64 rng(SplitMix64::mix(SplitMix64::mix(spec.seed, 0x6e6f69u), i));
        for (std::size_t j = 0; fx.stores[i].size() < spec.min_member_triples; ++j) {
            const Term s = iri(kNoise + fx.member_ids[i] + "/s" + std::to_string(j));
            const Term p = iri(kNoise + "p" + std::to_string(j % 7));
            const Term o = (j % 3 == 2) ? iri(kNoise + "o" + std::to_string(rng.below(100000)))
                                        : lit("n" + std::to_string(rng.below(100000)));
            fx.stores[i].insert({s, p, o});
        }
    }
    return fx;
}

Store Fixtures::merged_store() const {
    std::vector<const Store*> parts;
    parts.reserve(stores.size());
    for (const Store& s : stores) parts.push_back(&s);
    return Store::merge(parts);
}

Federation Fixtures::make_federation(LatencySpec latency) const {
    Federation fed;
    for (std::size_t i = 0; i < stores.size(); ++i) {
        fed.add(std::make_shared<InProcessEndpoint>(member_ids[i], stores[i], latency,
                                                    SplitMix64::mix(spec.seed, 9000 + i)));
    }
    return fed;
}

void write_fixtures(const Fixtures& fx, const std::filesystem::path& out_dir,
                    const std::filesystem::path& corpus_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < fx.stores.size(); ++i) {
        const std::string file = fx.member_ids[i] + ".nt";
        std::ofstream out(out_dir / file, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + (out_dir / file).string());
        out << serialize_ntriples(fx.stores[i].triples());
        if (!out.flush()) throw ConfigError("failed writing " + (out_dir / file).string());
        members.push_back({{"id", fx.member_ids[i]},
                           {"data", nlohmann::ordered_json::array({file})}});
        counts[fx.member_ids[i]] = fx.stores[i].size();
    }

    nlohmann::ordered_json fed;
    fed["seed"] = fx.spec.seed;
    fed["members"] = members;
    std::ofstream fed_out(out_dir / "federation.json", std::ios::binary);
    fed_out << fed.dump(2) << "\n";
    if (!fed_out.flush()) throw ConfigError("failed writing federation.json");

    nlohmann::ordered_json manifest;
    manifest["seed"] = fx.spec.seed;
    manifest["members"] = fx.spec.members;
    manifest["overlap"] = fx.spec.overlap;
    manifest["min_member_triples"] = fx.spec.min_member_triples;
    const Store merged = fx.merged_store();
    manifest["total_triples"] = merged.size();
    manifest["member_triples"] = counts;
    if (!corpus_dir.empty()) {
        nlohmann::ordered_json expected = nlohmann::ordered_json::object();
        for (const auto& [name, text] : load_corpus({corpus_dir})) {
            expected[name] = evaluate(merged, parse_query(text)).rows.size();
        }
        manifest["expected_rows"] = expected;
    }
    std::ofstream man_out(out_dir / "manifest.json", std::ios::binary);
    man_out << manifest.dump(2) << "\n";
    if (!man_out.flush()) throw ConfigError("failed writing manifest.json");
}

}  // namespace fedmesh
