#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace protolink {

/// Annotated span; offsets are byte offsets into Article::text().
struct Mention {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string text;
    std::string cui;
};

struct Article {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<Mention> mentions;

    /// title + "\n" + abstract; the string mention offsets index into.
    std::string text() const { return title + "\n" + abstract; }
};

/// Line-delimited JSON articles
/// {"id","title","abstract","mentions":[{"start","end","text","cui"}]}.
/// Checks that every surface matches its slice and carries exactly one gold cui.
std::vector<Article> load_corpus(const std::filesystem::path& path);

std::size_t word_count(std::string_view text);

/// Per-article short form -> long form pairs (Ab3p-style output).
class AbbreviationMap {
public:
    void add(std::string article_id, std::string short_form, std::string long_form);

    /// Replaces whole-word occurrences of the article's short forms inside
    /// `surface` with their long forms, longest short form first.
    std::string expand(std::string_view article_id, std::string_view surface) const;

    std::size_t size() const noexcept;

private:
    std::map<std::string, std::map<std::string, std::string>, std::less<>> by_article_;
};

/// Lines of "<article_id>\t<short>\t<long>".
AbbreviationMap load_abbreviations(const std::filesystem::path& path);

} // namespace protolink
