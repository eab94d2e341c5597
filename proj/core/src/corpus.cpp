#include "protolink/corpus.hpp"

#include "jsonl.hpp"
#include "protolink/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

namespace protolink {

std::vector<Article> load_corpus(const std::filesystem::path& path) {
    std::vector<Article> articles;
    std::unordered_set<std::string> ids;
    detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line_no) {
        auto fail = [&](ErrorCode code, const std::string& why) {
            throw Error(code, path.filename().string() + " line " + std::to_string(line_no) + ": " + why);
        };
        Article a;
        a.id = j.at("id").get<std::string>();
        a.title = j.at("title").get<std::string>();
        a.abstract = j.at("abstract").get<std::string>();
        if (!ids.insert(a.id).second) fail(ErrorCode::DuplicateId, "duplicate article id " + a.id);
        const std::string text = a.text();
        for (const auto& m : j.at("mentions")) {
            Mention mention;
            mention.start = m.at("start").get<std::size_t>();
            mention.end = m.at("end").get<std::size_t>();
            mention.text = m.at("text").get<std::string>();
            if (!m.at("cui").is_string()) fail(ErrorCode::MalformedRecord, "mention must carry exactly one gold cui");
            mention.cui = m.at("cui").get<std::string>();
            if (mention.cui.empty() || mention.cui.find_first_of(",|; \t") != std::string::npos) {
                fail(ErrorCode::MalformedRecord, "mention must carry exactly one gold cui, got '" + mention.cui + "'");
            }
            if (mention.start >= mention.end || mention.end > text.size()) {
                fail(ErrorCode::MalformedRecord, "mention offsets [" + std::to_string(mention.start) + ", " +
                                                     std::to_string(mention.end) + ") out of range");
            }
            if (text.compare(mention.start, mention.end - mention.start, mention.text) != 0) {
                fail(ErrorCode::MalformedRecord, "mention text '" + mention.text + "' does not match its offsets");
            }
            a.mentions.push_back(std::move(mention));
        }
        std::stable_sort(a.mentions.begin(), a.mentions.end(),
                         [](const Mention& x, const Mention& y) { return x.start < y.start; });
        articles.push_back(std::move(a));
    });
    return articles;
}

std::size_t word_count(std::string_view text) { return detail::split_whitespace(text).size(); }

void AbbreviationMap::add(std::string article_id, std::string short_form, std::string long_form) {
    if (short_form.empty() || long_form.empty()) {
        throw Error(ErrorCode::MalformedRecord, "abbreviation with empty short or long form");
    }
    by_article_[std::move(article_id)][std::move(short_form)] = std::move(long_form);
}

std::size_t AbbreviationMap::size() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, m] : by_article_) n += m.size();
    return n;
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

} // namespace

std::string AbbreviationMap::expand(std::string_view article_id, std::string_view surface) const {
    auto it = by_article_.find(article_id);
    if (it == by_article_.end()) return std::string(surface);

    std::vector<std::pair<std::string_view, std::string_view>> forms;
    for (const auto& [s, l] : it->second) forms.emplace_back(s, l);
    std::stable_sort(forms.begin(), forms.end(),
                     [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });

    std::string out;
    std::size_t i = 0;
    while (i < surface.size()) {
        bool replaced = false;
        const bool at_boundary = i == 0 || !is_word_char(surface[i - 1]);
        if (at_boundary) {
            for (const auto& [s, l] : forms) {
                if (surface.substr(i, s.size()) != s) continue;
                const std::size_t after = i + s.size();
                if (after < surface.size() && is_word_char(surface[after])) continue;
                out += l;
                i = after;
                replaced = true;
                break;
            }
        }
        if (!replaced) out += surface[i++];
    }
    return out;
}

AbbreviationMap load_abbreviations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + path.string());
    AbbreviationMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto parts = detail::split(line, '\t');
        if (parts.size() != 3) {
            throw Error(ErrorCode::MalformedRecord, path.filename().string() + " line " + std::to_string(line_no) +
                                                        ": expected <article_id>\\t<short>\\t<long>");
        }
        map.add(std::move(parts[0]), std::move(parts[1]), std::move(parts[2]));
    }
    return map;
}

} // namespace protolink
