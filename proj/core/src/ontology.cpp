#include "protolink/ontology.hpp"

#include "jsonl.hpp"
#include "protolink/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <unordered_set>

namespace protolink {

using nlohmann::json;

bool RelationTable::add(std::string_view a, std::string_view b) {
    if (a == b) return false;
    auto key = a < b ? std::pair{std::string(a), std::string(b)} : std::pair{std::string(b), std::string(a)};
    return pairs_.insert(std::move(key)).second;
}

bool RelationTable::contains(std::string_view a, std::string_view b) const {
    if (a == b) return false;
    auto key = a < b ? std::pair{std::string(a), std::string(b)} : std::pair{std::string(b), std::string(a)};
    return pairs_.find(key) != pairs_.end();
}

namespace {

void normalize_aliases(Entity& e) {
    std::vector<std::string> aliases;
    aliases.reserve(e.aliases.size() + 1);
    aliases.push_back(e.canonical_name);
    for (auto& a : e.aliases) {
        if (std::find(aliases.begin(), aliases.end(), a) == aliases.end()) aliases.push_back(std::move(a));
    }
    e.aliases = std::move(aliases);
}

void validate_active(const Entity& e) {
    auto fail = [&](const std::string& why) { throw Error(ErrorCode::MalformedRecord, "entity " + e.cui + ": " + why); };
    if (e.canonical_name.empty()) fail("empty canonical name");
    for (const auto& a : e.aliases) {
        if (a.empty()) fail("empty alias");
    }
    if (e.type_ids.empty()) fail("no semantic types");
    if (e.type_ids.size() != e.type_names.size()) fail("type_ids and type_names differ in length");
    for (const auto& t : e.type_names) {
        if (t.empty()) fail("empty semantic type name");
    }
}

} // namespace

OntologySnapshot OntologySnapshot::build(std::vector<Entity> records,
                                         const std::vector<std::pair<std::string, std::string>>& relations) {
    OntologySnapshot snap;
    std::unordered_set<std::string> seen;
    snap.summary_.total = records.size();

    for (auto& e : records) {
        if (e.cui.empty()) throw Error(ErrorCode::MalformedRecord, "record with empty cui");
        if (!seen.insert(e.cui).second) throw Error(ErrorCode::DuplicateId, "duplicate cui " + e.cui);
        switch (e.status) {
        case EntityStatus::Active:
            normalize_aliases(e);
            validate_active(e);
            ++snap.summary_.active;
            break;
        case EntityStatus::Deleted:
            ++(e.deprecated ? snap.summary_.deprecated : snap.summary_.deleted);
            break;
        case EntityStatus::Suppressed:
            ++snap.summary_.suppressed;
            break;
        case EntityStatus::MergedInto:
            if (e.merged_into.empty()) {
                throw Error(ErrorCode::MalformedRecord, "entity " + e.cui + ": merged record without merged_into");
            }
            ++snap.summary_.merged;
            snap.merge_map_.emplace(e.cui, e.merged_into);
            break;
        }
    }

    // Merged records live only in the merge map.
    std::erase_if(records, [](const Entity& e) { return e.status == EntityStatus::MergedInto; });
    snap.records_ = std::move(records);
    snap.by_cui_.reserve(snap.records_.size());
    for (std::size_t i = 0; i < snap.records_.size(); ++i) {
        snap.by_cui_.emplace(snap.records_[i].cui, i);
        if (snap.records_[i].is_active()) snap.active_.push_back(&snap.records_[i]);
    }

    for (const auto& [from, to] : snap.merge_map_) {
        std::unordered_set<std::string_view> chain{from};
        std::string_view cur = to;
        for (;;) {
            if (!chain.insert(cur).second) throw Error(ErrorCode::MergeCycle, "merge cycle through " + from);
            if (const Entity* e = snap.find(cur)) {
                if (!e->is_active()) {
                    throw Error(ErrorCode::MergeTargetInactive,
                                from + " merges into non-active entity " + std::string(cur));
                }
                break;
            }
            auto next = snap.merge_map_.find(cur);
            if (next == snap.merge_map_.end()) {
                throw Error(ErrorCode::MergeTargetMissing, from + " merges into unknown cui " + std::string(cur));
            }
            cur = next->second;
        }
    }

    for (const auto& [a, b] : relations) {
        if (!snap.is_known(a)) throw Error(ErrorCode::UnknownId, "relation references unknown cui " + a);
        if (!snap.is_known(b)) throw Error(ErrorCode::UnknownId, "relation references unknown cui " + b);
        const Entity* ea = snap.find(a);
        const Entity* eb = snap.find(b);
        if ((ea && !ea->is_active()) || (eb && !eb->is_active())) continue;
        snap.relations_.add(snap.resolve(a), snap.resolve(b));
    }
    return snap;
}

const Entity* OntologySnapshot::find(std::string_view cui) const {
    auto it = by_cui_.find(cui);
    return it == by_cui_.end() ? nullptr : &records_[it->second];
}

bool OntologySnapshot::is_known(std::string_view cui) const {
    return find(cui) != nullptr || merge_map_.find(cui) != merge_map_.end();
}

std::string OntologySnapshot::resolve(std::string_view cui) const {
    std::string_view cur = cui;
    // Acyclicity is validated at build; the bound only guards hand-built state.
    for (std::size_t steps = 0; steps <= merge_map_.size(); ++steps) {
        if (const Entity* e = find(cur)) {
            if (!e->is_active()) {
                throw Error(ErrorCode::InconsistentSnapshot,
                            std::string(cui) + " resolves to non-active entity " + std::string(cur));
            }
            return std::string(cur);
        }
        auto next = merge_map_.find(cur);
        if (next == merge_map_.end()) throw Error(ErrorCode::UnknownId, "unknown cui " + std::string(cur));
        cur = next->second;
    }
    throw Error(ErrorCode::InconsistentSnapshot, "merge chain from " + std::string(cui) + " does not terminate");
}

const Entity& OntologySnapshot::active_entity(std::string_view cui) const {
    return *find(resolve(cui));
}

bool OntologySnapshot::is_related(std::string_view a, std::string_view b) const {
    return relations_.contains(resolve(a), resolve(b));
}

namespace {

const std::vector<std::string> kFields = {"cui",        "name",     "aliases",    "type_ids", "type_names",
                                          "group_id",   "group_name", "status",   "merged_into"};

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
    return out;
}

Entity parse_record(const json& j) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
            throw Error(ErrorCode::MalformedRecord, "unexpected field '" + key + "'");
        }
    }
    Entity e;
    e.cui = j.at("cui").get<std::string>();
    auto status = detail::ascii_lower(j.at("status").get<std::string>());
    if (status == "active") {
        e.status = EntityStatus::Active;
    } else if (status == "deleted") {
        e.status = EntityStatus::Deleted;
    } else if (status == "deprecated") {
        e.status = EntityStatus::Deleted;
        e.deprecated = true;
    } else if (status == "suppressed") {
        e.status = EntityStatus::Suppressed;
    } else if (status == "merged" || status == "mergedinto") {
        e.status = EntityStatus::MergedInto;
        e.merged_into = j.at("merged_into").get<std::string>();
    } else {
        throw Error(ErrorCode::MalformedRecord, "unknown status '" + status + "'");
    }
    if (e.status != EntityStatus::MergedInto && j.contains("merged_into") && !j.at("merged_into").is_null()) {
        throw Error(ErrorCode::MalformedRecord, "merged_into given for non-merged status");
    }

    // Non-active records may omit descriptive fields.
    const bool required = e.status == EntityStatus::Active;
    auto text = [&](const char* key, std::string& out) {
        if (required || j.contains(key)) out = j.at(key).get<std::string>();
    };
    auto list = [&](const char* key, std::vector<std::string>& out) {
        if (required || j.contains(key)) out = string_list(j, key);
    };
    text("name", e.canonical_name);
    list("aliases", e.aliases);
    list("type_ids", e.type_ids);
    list("type_names", e.type_names);
    text("group_id", e.group_id);
    text("group_name", e.group_name);
    return e;
}

} // namespace

std::vector<Entity> read_ontology_records(const std::filesystem::path& path) {
    std::vector<Entity> records;
    detail::for_each_json_line(path, [&](const json& j, std::size_t line_no) {
        try {
            records.push_back(parse_record(j));
        } catch (const Error& e) {
            throw Error(e.code(), path.filename().string() + " line " + std::to_string(line_no) + ": " + e.message());
        }
    });
    return records;
}

std::vector<std::pair<std::string, std::string>> read_relations(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    detail::for_each_json_line(path, [&](const json& j, std::size_t) {
        out.emplace_back(j.at("cui1").get<std::string>(), j.at("cui2").get<std::string>());
    });
    return out;
}

OntologySnapshot load_ontology(const std::filesystem::path& path) {
    return OntologySnapshot::build(read_ontology_records(path));
}

OntologySnapshot load_ontology(const std::filesystem::path& path, const std::filesystem::path& relations_path) {
    return OntologySnapshot::build(read_ontology_records(path), read_relations(relations_path));
}

std::string to_ontology_line(const Entity& e) {
    json j;
    j["cui"] = e.cui;
    j["name"] = e.canonical_name;
    j["aliases"] = e.aliases;
    j["type_ids"] = e.type_ids;
    j["type_names"] = e.type_names;
    j["group_id"] = e.group_id;
    j["group_name"] = e.group_name;
    switch (e.status) {
    case EntityStatus::Active: j["status"] = "active"; break;
    case EntityStatus::Deleted: j["status"] = e.deprecated ? "deprecated" : "deleted"; break;
    case EntityStatus::Suppressed: j["status"] = "suppressed"; break;
    case EntityStatus::MergedInto:
        j["status"] = "merged";
        j["merged_into"] = e.merged_into;
        break;
    }
    return j.dump();
}

} // namespace protolink
