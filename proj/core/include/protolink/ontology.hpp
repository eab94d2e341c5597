#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace protolink {

enum class EntityStatus { Active, Deleted, Suppressed, MergedInto };

/// One ontology concept. `aliases[0]` is always the canonical name.
struct Entity {
    std::string cui;
    std::string canonical_name;
    std::vector<std::string> aliases;
    std::vector<std::string> type_ids;
    std::vector<std::string> type_names;
    std::string group_id;
    std::string group_name;
    EntityStatus status = EntityStatus::Active;
    std::string merged_into; ///< set only when status == MergedInto
    /// Deprecated without a synonymous successor; carried as Deleted.
    bool deprecated = false;

    bool is_active() const noexcept { return status == EntityStatus::Active; }
};

/// Tallies by input status, reported after loading.
struct LoadSummary {
    std::size_t total = 0;
    std::size_t active = 0;
    std::size_t deleted = 0;
    std::size_t suppressed = 0;
    std::size_t merged = 0;
    std::size_t deprecated = 0;

    /// Records dropped without a successor. Merged records are remapped, not excluded.
    std::size_t excluded() const noexcept { return deleted + suppressed + deprecated; }
};

/// Unordered cui pairs; `contains(a, b) == contains(b, a)`.
class RelationTable {
public:
    /// Self pairs are ignored; returns whether a new pair was stored.
    bool add(std::string_view a, std::string_view b);
    bool contains(std::string_view a, std::string_view b) const;
    std::size_t size() const noexcept { return pairs_.size(); }
    const std::set<std::pair<std::string, std::string>, std::less<>>& pairs() const noexcept { return pairs_; }

private:
    std::set<std::pair<std::string, std::string>, std::less<>> pairs_;
};

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

/// Immutable, validated view of the knowledge base. Safe for concurrent reads.
class OntologySnapshot {
public:
    /// Validates records and builds the snapshot. Relation endpoints are
    /// resolved through the merge map; pairs touching non-active entities or
    /// collapsing onto one entity are dropped.
    static OntologySnapshot build(std::vector<Entity> records,
                                  const std::vector<std::pair<std::string, std::string>>& relations = {});

    /// Active entities in input order.
    const std::vector<const Entity*>& active_entities() const noexcept { return active_; }
    std::size_t active_count() const noexcept { return active_.size(); }

    /// Any non-merged record (active, deleted or suppressed), or nullptr.
    const Entity* find(std::string_view cui) const;
    /// Entity for an active cui, after resolution. Throws UnknownId.
    const Entity& active_entity(std::string_view cui) const;

    const std::map<std::string, std::string, std::less<>>& merge_map() const noexcept { return merge_map_; }
    const RelationTable& relations() const noexcept { return relations_; }
    const LoadSummary& summary() const noexcept { return summary_; }

    bool is_known(std::string_view cui) const;

    /// Follows merge records to the active entity. Idempotent.
    std::string resolve(std::string_view cui) const;

    /// True iff the resolved pair is listed (directionless, direct pairs only).
    bool is_related(std::string_view a, std::string_view b) const;

private:
    OntologySnapshot() = default;

    std::vector<Entity> records_;
    std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> by_cui_;
    std::vector<const Entity*> active_;
    std::map<std::string, std::string, std::less<>> merge_map_;
    RelationTable relations_;
    LoadSummary summary_;
};

std::vector<Entity> read_ontology_records(const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> read_relations(const std::filesystem::path& path);

/// Loads the line-delimited ontology file (and optionally a relations file).
OntologySnapshot load_ontology(const std::filesystem::path& path);
OntologySnapshot load_ontology(const std::filesystem::path& path, const std::filesystem::path& relations_path);

/// Serializes one record in the interchange format (used by fixture writers).
std::string to_ontology_line(const Entity& entity);

} // namespace protolink
