#include "social/directive.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace social::dialogue {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kCategoryNames = {
    "greeting", "insult", "compliment", "question", "statement", "farewell", "other"};

enum Key { kThought, kAction, kActionInput, kAnswer, kEmotion, kIntensity, kCause, kCategory, kKeyCount };

struct KeyAlias {
    std::string_view text;
    Key key;
};

// Longest aliases first so "action input" is not read as "action".
constexpr KeyAlias kAliases[] = {
    {"interaction category", kCategory}, {"action input", kActionInput}, {"final answer", kAnswer},
    {"intensity", kIntensity},           {"category", kCategory},        {"thought", kThought},
    {"emotion", kEmotion},               {"answer", kAnswer},            {"action", kAction},
    {"cause", kCause},
};

// Recognises "<key>:" at the start of a line (after whitespace and markdown
// decoration). On success stores the text after the colon in `value` and the
// byte offset of that text within the line in `value_pos`.
std::optional<Key> match_key(std::string_view line, std::string& value, std::size_t& value_pos) {
    std::size_t i = 0;
    bool emphasised = false;
    while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == '*' ||
                               line[i] == '#' || line[i] == '>' || line[i] == '_')) {
        emphasised = emphasised || line[i] == '*' || line[i] == '_';
        ++i;
    }
    const auto rest = line.substr(i);
    for (const auto& alias : kAliases) {
        if (!starts_with_icase(rest, alias.text)) continue;
        std::size_t j = alias.text.size();
        while (j < rest.size() && (rest[j] == '*' || rest[j] == '_' || rest[j] == ' ' || rest[j] == '\t')) ++j;
        if (j >= rest.size() || rest[j] != ':') continue;
        value_pos = i + j + 1;
        // "**Answer:** text": the closing emphasis follows the colon.
        if (emphasised) {
            while (value_pos < line.size() && (line[value_pos] == '*' || line[value_pos] == '_')) ++value_pos;
        }
        value = trim(line.substr(value_pos));
        return alias.key;
    }
    return std::nullopt;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

// Balanced {...} starting at the first '{' in `text`, string-aware.
std::optional<std::string_view> balanced_object(std::string_view text) {
    const auto start = text.find('{');
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escape = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escape) escape = false;
            else if (c == '\\') escape = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return text.substr(start, i - start + 1);
    }
    return std::nullopt;
}

json parse_tool_input(std::string_view from_value_onward, const std::string& line_value) {
    if (auto obj = balanced_object(from_value_onward)) {
        try {
            auto j = json::parse(obj->begin(), obj->end());
            if (j.is_object()) return j;
        } catch (const json::exception&) {
        }
    }
    std::string v = line_value;
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
    if (v.empty()) return json::object();
    return json{{"input", v}};
}

std::string first_word(std::string_view s) {
    std::string out;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalpha(u) || c == '-' || c == '_') {
            out.push_back(c);
        } else if (!out.empty()) {
            break;
        }
    }
    return out;
}

double parse_intensity(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const char* begin = t.data();
    if (!t.empty() && t[0] == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
    if (ec != std::errc{} || !std::isfinite(v)) return 0.0;
    return std::clamp(v, 0.0, 1.0);
}

std::string normalize_action(std::string_view s) {
    std::string v = trim(s);
    while (!v.empty() && (v.front() == '`' || v.front() == '"' || v.front() == '\'')) v.erase(v.begin());
    while (!v.empty() && (v.back() == '`' || v.back() == '"' || v.back() == '\'' || v.back() == '.')) v.pop_back();
    return to_lower(trim(v));
}

}  // namespace

std::string_view to_string(InteractionCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<InteractionCategory> parse_category(std::string_view s) {
    const std::string key = to_lower(trim(s));
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (key == kCategoryNames[i]) return kAllCategories[i];
    }
    return std::nullopt;
}

AgentDirective parse_directive(std::string_view raw) {
    struct Field {
        bool set = false;
        std::string value;
        std::size_t line = 0;
        std::size_t value_offset = 0;  // byte offset into raw
    };
    std::array<Field, kKeyCount> fields{};
    const auto lines = split_lines(raw);

    std::string answer;
    bool in_answer = false;
    std::string residue;  // lines that are not tag lines
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string value;
        std::size_t value_pos = 0;
        const auto key = match_key(lines[i], value, value_pos);
        if (key) {
            in_answer = false;
            Field& f = fields[*key];
            if (!f.set) {
                f.set = true;
                f.value = value;
                f.line = i;
                f.value_offset = static_cast<std::size_t>(lines[i].data() - raw.data()) + value_pos;
                if (*key == kAnswer) {
                    answer = value;
                    in_answer = true;
                }
            }
            continue;
        }
        if (in_answer) {
            answer += '\n';
            answer += lines[i];
        }
        if (!residue.empty()) residue += '\n';
        residue += lines[i];
    }

    if (fields[kAction].set) {
        const std::string action = normalize_action(fields[kAction].value);
        if (!action.empty() && action != "none" && action != "final answer" && action != "n/a") {
            ToolRequest req;
            req.thought = fields[kThought].value;
            req.tool_name = action;
            if (fields[kActionInput].set) {
                req.tool_input = parse_tool_input(raw.substr(fields[kActionInput].value_offset),
                                                  fields[kActionInput].value);
            }
            return req;
        }
    }

    FinalResponse fin;
    if (fields[kThought].set) fin.thought = fields[kThought].value;
    std::string text = fields[kAnswer].set ? trim(answer) : std::string();
    if (text.empty()) text = trim(residue);
    if (text.empty()) text = trim(raw);
    fin.answer = std::move(text);
    if (fields[kEmotion].set) {
        auto e = affect::parse_emotion(fields[kEmotion].value);
        if (!e) e = affect::parse_emotion(first_word(fields[kEmotion].value));
        fin.emotion = e.value_or(affect::EmotionCategory::neutral);
    }
    if (fields[kIntensity].set) fin.intensity = parse_intensity(fields[kIntensity].value);
    if (fields[kCause].set) {
        auto c = affect::parse_cause(fields[kCause].value);
        if (!c) c = affect::parse_cause(first_word(fields[kCause].value));
        fin.cause = c.value_or(affect::Cause::none);
    }
    if (fields[kCategory].set) {
        auto c = parse_category(fields[kCategory].value);
        if (!c) c = parse_category(first_word(fields[kCategory].value));
        fin.category = c.value_or(InteractionCategory::other);
    }
    return fin;
}

std::string render_directive(const AgentDirective& d) {
    if (const auto* req = std::get_if<ToolRequest>(&d)) {
        return "Thought: " + req->thought + "\nAction: " + req->tool_name +
               "\nAction Input: " + req->tool_input.dump(-1, ' ', false, json::error_handler_t::replace);
    }
    const auto& fin = std::get<FinalResponse>(d);
    std::string out;
    if (fin.thought) out += "Thought: " + *fin.thought + "\n";
    out += "Answer: " + fin.answer;
    out += "\nEmotion: " + std::string(affect::to_string(fin.emotion));
    out += "\nIntensity: " + format_double(fin.intensity);
    out += "\nCause: " + std::string(affect::to_string(fin.cause));
    out += "\nCategory: " + std::string(to_string(fin.category));
    return out;
}

json to_json(const AgentDirective& d) {
    if (const auto* req = std::get_if<ToolRequest>(&d)) {
        return {{"type", "tool_request"}, {"thought", req->thought}, {"tool", req->tool_name}, {"input", req->tool_input}};
    }
    const auto& fin = std::get<FinalResponse>(d);
    json j{{"type", "final_response"},
           {"answer", fin.answer},
           {"emotion", affect::to_string(fin.emotion)},
           {"intensity", fin.intensity},
           {"cause", affect::to_string(fin.cause)},
           {"category", to_string(fin.category)}};
    j["thought"] = fin.thought ? json(*fin.thought) : json(nullptr);
    return j;
}

json to_json(const AgentResponse& r) {
    json trace = json::array();
    for (const auto& t : r.tool_trace) trace.push_back(tools::to_json(t));
    json knowledge = json::array();
    for (const auto& p : r.knowledge) knowledge.push_back(memory::to_json(p));
    json memories = json::array();
    for (const auto& p : r.memories) memories.push_back(memory::to_json(p));
    return {{"turn_id", r.turn_id},
            {"answer", r.answer},
            {"emotion", affect::to_string(r.emotion)},
            {"base_intensity", r.base_intensity},
            {"intensity", r.intensity},
            {"cause", affect::to_string(r.cause)},
            {"category", to_string(r.category)},
            {"tool_trace", trace},
            {"knowledge", knowledge},
            {"memories", memories},
            {"completions", r.completions},
            {"iteration_limit_reached", r.iteration_limit_reached}};
}

}  // namespace social::dialogue
