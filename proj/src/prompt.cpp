#include "affectsense/prompt.hpp"
#include "affectsense/csv.hpp"

#include <cctype>
#include <charconv>

namespace affectsense {

std::string_view item_name(Item item) {
    static constexpr std::array<std::string_view, kItemCount> names = {
        "Active", "Determined", "Attentive", "Inspired", "Alert", "Upset", "Hostile", "Ashamed", "Nervous", "Afraid"};
    return names[static_cast<std::size_t>(item)];
}

std::string_view item_key(Item item) {
    static constexpr std::array<std::string_view, kItemCount> keys = {
        "active", "determined", "attentive", "inspired", "alert", "upset", "hostile", "ashamed", "nervous", "afraid"};
    return keys[static_cast<std::size_t>(item)];
}

bool AffectScores::valid(bool allow_undecided) const {
    for (int v : values)
        if (!((v >= 1 && v <= 5) || (allow_undecided && v == kUndecided))) return false;
    return true;
}

bool AffectScores::any_undecided() const {
    for (int v : values)
        if (v == kUndecided) return true;
    return false;
}

std::string Prompt::mode_name() const {
    std::string name = kind == PromptKind::ZeroShot ? "ZeroShot" : "FewShot";
    if (cot) name += "CoT";
    if (kind == PromptKind::FewShot) name += "(" + std::to_string(shots) + ")";
    return name;
}

// ---- templates -------------------------------------------------------------------

namespace {

constexpr std::string_view kZeroShotIntro =
    "Below is a description of a university student's activities over a week, gathered from their smartphone "
    "sensors. Based on the descriptions provided, select the option that best represents how the student felt for "
    "the provided week's description below for the following feelings:";

constexpr std::string_view kFewShotIntro =
    "Given a series of descriptions detailing a university student's weekly activities collected from their "
    "smartphone sensors, along with their corresponding feelings, your task is to identify patterns between the "
    "student's activities and feelings. Based on these patterns, make predictions for the student's feelings "
    "according to their future activities.";

constexpr std::string_view kFewShotQuestion =
    "Based on the patterns you learnt from the data provided, select the option that best represents how the "
    "student felt for the future week's description below for the following feelings:";

constexpr std::string_view kZeroShotLikert =
    "For each feeling, choose a Likert score ranging from 1 to 5 that best represents how the student generally "
    "felt during the week where 1 represents Never and 5 represents Always.";

// Few-shot figure wording, kept as published ("an Likert").
constexpr std::string_view kFewShotLikert =
    "For each feeling, choose an Likert score ranging from 1 to 5 that best represents how the student generally "
    "felt during the week where 1 represents Never and 5 represents Always.";

constexpr std::string_view kUndecidedOption = "If you are not able to decide, answer Not able to decide (-1).";

std::string numbered_items() {
    std::string out;
    for (std::size_t i = 0; i < kAllItems.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + std::string(item_name(kAllItems[i]));
    }
    return out;
}

std::string answer_form(std::string_view placeholder) {
    std::string out;
    for (std::size_t i = 0; i < kAllItems.size(); ++i) {
        if (i) out += '\n';
        out += std::string(item_name(kAllItems[i])) + ": " + std::string(placeholder);
    }
    return out;
}

std::string example_block(const std::array<std::string, kItemCount>& scores, std::string_view description) {
    std::string out(kExampleLead);
    for (std::size_t i = 0; i < kAllItems.size(); ++i) {
        if (i) out += ", ";
        out += "how " + std::string(item_key(kAllItems[i])) + " they felt is " + scores[i];
    }
    out += ": ";
    out += description;
    return out;
}

std::string zero_shot_text(std::string_view description, bool allow_undecided) {
    std::string out(kZeroShotIntro);
    out += "\n\n" + numbered_items() + "\n\n";
    out += kZeroShotLikert;
    if (allow_undecided) {
        out += ' ';
        out += kUndecidedOption;
    }
    out += "\n\n";
    out += kDescriptionLead;
    out += description;
    out += "\n\n";
    out += kNoReasoning;
    out += "\n\n" + answer_form("[predicted number]");
    return out;
}

std::string few_shot_text(const std::vector<std::string>& blocks, std::string_view description,
                          bool allow_undecided) {
    std::string out(kFewShotIntro);
    for (const auto& b : blocks) out += "\n\n" + b;
    out += "\n\n";
    out += kFewShotQuestion;
    out += "\n\n" + numbered_items() + "\n\n";
    out += kFewShotLikert;
    if (allow_undecided) {
        out += ' ';
        out += kUndecidedOption;
    }
    out += "\n\n";
    out += kDescriptionLead;
    out += description;
    out += "\n\n";
    out += kNoReasoning;
    out += "\n\n" + answer_form("[predict number]");
    return out;
}

} // namespace

std::string zero_shot_template() { return zero_shot_text("{feature description}", false); }

std::string few_shot_template() {
    std::array<std::string, kItemCount> scores;
    scores.fill("{score}");
    return few_shot_text({example_block(scores, "{weekly description}")}, "{feature description}", false);
}

Prompt build_zero_shot(const WeeklyDescription& week, const PromptOptions& options) {
    Prompt p;
    p.kind = PromptKind::ZeroShot;
    p.text = zero_shot_text(week.full_text, options.allow_undecided);
    return p;
}

Prompt build_few_shot(std::span<const ShotExample> examples, const WeeklyDescription& query,
                      const PromptOptions& options) {
    if (examples.empty()) throw EmptyExamples("few-shot prompts need at least one example");
    if (examples.size() > 10) throw Error("at most 10 examples are supported");
    Prompt p;
    p.kind = PromptKind::FewShot;
    p.shots = static_cast<int>(examples.size());
    std::vector<std::string> blocks;
    for (const auto& ex : examples) {
        if (!ex.week) throw Error("example without a description");
        if (!ex.labels.valid()) throw IncompleteLabels("example week " + std::to_string(ex.week_id) +
                                                       " has missing or out-of-range labels");
        std::array<std::string, kItemCount> scores;
        for (std::size_t i = 0; i < kItemCount; ++i) scores[i] = std::to_string(ex.labels.values[i]);
        blocks.push_back(example_block(scores, ex.week->full_text));
        p.shot_week_ids.push_back(ex.week_id);
    }
    p.text = few_shot_text(blocks, query.full_text, options.allow_undecided);
    return p;
}

Prompt apply_cot(const Prompt& prompt) {
    if (prompt.cot) throw AlreadyCoT("prompt is already in chain-of-thought mode");
    // The instruction sits after the query description, so search from the end.
    const auto pos = prompt.text.rfind(kNoReasoning);
    if (pos == std::string::npos) throw Error("prompt has no answer-format instruction");
    Prompt out = prompt;
    out.text.replace(pos, kNoReasoning.size(), kWithReasoning);
    out.cot = true;
    return out;
}

// ---- response parsing ----------------------------------------------------------------

namespace {

bool iequals_prefix(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    return true;
}

bool is_marker(char c) { return c == ' ' || c == '\t' || c == '*' || c == '-' || c == '+' || c == '#' || c == '>' || c == '_'; }

struct HeaderMatch {
    Item item;
    std::string_view rest; // after the colon
};

// Recognizes "<Item>:" at the start of a line, after list markers, numbering and emphasis.
std::optional<HeaderMatch> match_header(std::string_view line) {
    std::size_t i = 0;
    for (;;) {
        while (i < line.size() && is_marker(line[i])) ++i;
        if (line.substr(i, 3) == "\xE2\x80\xA2") { // bullet
            i += 3;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i && j < line.size() && (line[j] == '.' || line[j] == ')')) {
            i = j + 1;
            continue;
        }
        break;
    }
    const std::string_view body = line.substr(i);
    for (Item item : kAllItems) {
        const auto name = item_name(item);
        if (!iequals_prefix(body, name)) continue;
        std::size_t k = name.size();
        if (k < body.size() && std::isalpha(static_cast<unsigned char>(body[k]))) continue;
        while (k < body.size() && (body[k] == ' ' || body[k] == '*' || body[k] == '_')) ++k;
        if (k < body.size() && body[k] == ':') return HeaderMatch{item, body.substr(k + 1)};
        return std::nullopt;
    }
    return std::nullopt;
}

struct LeadingScore {
    long long value;
    std::string_view rest;
};

std::optional<LeadingScore> leading_integer(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '*' || s[i] == '[' || s[i] == '(' || s[i] == '_'))
        ++i;
    const std::size_t start = i;
    if (i < s.size() && s[i] == '-') ++i;
    const std::size_t digits = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits) return std::nullopt;
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data() + start, s.data() + i, v);
    if (ec != std::errc{}) return std::nullopt;
    (void)p;
    return LeadingScore{v, s.substr(i)};
}

int checked_score(Item item, long long v, bool allow_undecided) {
    if ((v >= 1 && v <= 5) || (allow_undecided && v == kUndecided)) return static_cast<int>(v);
    throw OutOfRange(item, v);
}

std::string_view strip_reasoning_lead(std::string_view s) {
    for (;;) {
        const auto before = s.size();
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == ']' || s.front() == ')' ||
                              s.front() == '*' || s.front() == '-' || s.front() == ':' || s.front() == '.' ||
                              s.front() == ',' || s.front() == '_'))
            s.remove_prefix(1);
        if (s.substr(0, 3) == "\xE2\x80\x94" || s.substr(0, 3) == "\xE2\x80\x93") s.remove_prefix(3);
        if (s.size() == before) return s;
    }
}

std::string_view trim_ws(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

AffectScores parse_scores(std::string_view completion, bool allow_undecided) {
    AffectScores scores;
    std::array<bool, kItemCount> seen{};
    for (const auto line : csv::lines(completion)) {
        const auto header = match_header(line);
        if (!header) continue;
        const auto idx = static_cast<std::size_t>(header->item);
        if (seen[idx]) continue;
        const auto score = leading_integer(header->rest);
        if (!score) continue;
        seen[idx] = true;
        scores.values[idx] = checked_score(header->item, score->value, allow_undecided);
    }
    for (Item item : kAllItems)
        if (!seen[static_cast<std::size_t>(item)]) throw MissingItem(item);
    return scores;
}

CoTResponse parse_cot(std::string_view completion, bool allow_undecided) {
    CoTResponse out;
    std::array<bool, kItemCount> seen{};
    std::optional<std::size_t> current; // item collecting reasoning lines
    std::array<std::string, kItemCount> text;

    for (const auto line : csv::lines(completion)) {
        if (const auto header = match_header(line)) {
            const auto idx = static_cast<std::size_t>(header->item);
            current.reset();
            if (seen[idx]) continue;
            seen[idx] = true;
            const auto score = leading_integer(header->rest);
            if (!score) throw MissingItem(header->item);
            out.items[idx].score = checked_score(header->item, score->value, allow_undecided);
            text[idx] = std::string(strip_reasoning_lead(score->rest));
            current = idx;
            continue;
        }
        if (current) {
            text[*current] += '\n';
            text[*current] += line;
        }
    }
    for (Item item : kAllItems) {
        const auto idx = static_cast<std::size_t>(item);
        if (!seen[idx]) throw MissingItem(item);
        out.items[idx].reasoning = std::string(trim_ws(text[idx]));
    }
    return out;
}

AffectScores CoTResponse::scores() const {
    AffectScores s;
    for (std::size_t i = 0; i < kItemCount; ++i) s.values[i] = items[i].score;
    return s;
}

std::string render_answer_block(const AffectScores& scores) {
    std::string out;
    for (std::size_t i = 0; i < kAllItems.size(); ++i) {
        if (i) out += '\n';
        out += std::string(item_name(kAllItems[i])) + ": " + std::to_string(scores.values[i]);
    }
    return out;
}

} // namespace affectsense
