#pragma once

#include "affectsense/errors.hpp"
#include "affectsense/textualize.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affectsense {

/// I-PANAS-SF items in questionnaire order; the first five are positive affect.
enum class Item { Active, Determined, Attentive, Inspired, Alert, Upset, Hostile, Ashamed, Nervous, Afraid };
inline constexpr int kItemCount = 10;
inline constexpr std::array<Item, kItemCount> kAllItems = {Item::Active,  Item::Determined, Item::Attentive,
                                                           Item::Inspired, Item::Alert,     Item::Upset,
                                                           Item::Hostile, Item::Ashamed,   Item::Nervous,
                                                           Item::Afraid};

std::string_view item_name(Item item); // "Active"
std::string_view item_key(Item item);  // "active"
constexpr bool is_positive(Item item) { return static_cast<int>(item) < 5; }

inline constexpr int kUndecided = -1;

/// Scores for the ten items. A default-constructed value holds zeros, which are not valid scores.
struct AffectScores {
    std::array<int, kItemCount> values{};

    int& operator[](Item i) { return values[static_cast<std::size_t>(i)]; }
    int operator[](Item i) const { return values[static_cast<std::size_t>(i)]; }
    bool operator==(const AffectScores&) const = default;

    static AffectScores uniform(int score) {
        AffectScores s;
        s.values.fill(score);
        return s;
    }
    /// All scores in 1..5 (or -1 when `allow_undecided`).
    bool valid(bool allow_undecided = false) const;
    bool any_undecided() const;
};

enum class PromptKind { ZeroShot, FewShot };

struct Prompt {
    std::string text;
    PromptKind kind{PromptKind::ZeroShot};
    int shots{0};
    bool cot{false};
    std::vector<int> shot_week_ids;

    /// "ZeroShot", "FewShot(3)", "ZeroShotCoT", "FewShotCoT(3)"
    std::string mode_name() const;
};

struct ShotExample {
    const WeeklyDescription* week{nullptr};
    AffectScores labels;
    int week_id{0};
};

class EmptyExamples : public Error {
  public:
    using Error::Error;
};

class IncompleteLabels : public Error {
  public:
    using Error::Error;
};

class AlreadyCoT : public Error {
  public:
    using Error::Error;
};

struct PromptOptions {
    /// Offers "Not able to decide (-1)" alongside the Likert scale.
    bool allow_undecided{false};
};

Prompt build_zero_shot(const WeeklyDescription& week, const PromptOptions& options = {});
/// 1..10 labeled examples, embedded in the given order.
Prompt build_few_shot(std::span<const ShotExample> examples, const WeeklyDescription& query,
                      const PromptOptions& options = {});
Prompt apply_cot(const Prompt& prompt);

/// The zero-shot and few-shot templates with their placeholders in place ({feature description},
/// {score}, {weekly description}); the few-shot view shows a single example block.
std::string zero_shot_template();
std::string few_shot_template();

// Fixed phrases shared with the prompt readers.
inline constexpr std::string_view kZeroShotOpening =
    "Below is a description of a university student's activities over a week, gathered from their smartphone "
    "sensors.";
inline constexpr std::string_view kFewShotOpening =
    "Given a series of descriptions detailing a university student's weekly activities collected from their "
    "smartphone sensors";
inline constexpr std::string_view kExampleLead = "According to the following behaviors of the student during a week, ";
inline constexpr std::string_view kQueryLead = "Based on the patterns you learnt from the data provided";
inline constexpr std::string_view kDescriptionLead = "Description of the student's activities for the future week: ";
inline constexpr std::string_view kNoReasoning = "Provide your choices in the following form with no other reasoning:";
inline constexpr std::string_view kWithReasoning =
    "Provide your choices in the following form with reasoning for each item. The reasoning should be based on the "
    "comparison of provided student's weekly behaviors: {item}: [predicted number and reasoning].";

// ---- responses ----------------------------------------------------------------

class MissingItem : public Error {
  public:
    explicit MissingItem(Item item)
        : Error("missing score for " + std::string(item_name(item))), item_(item) {}
    Item item() const { return item_; }

  private:
    Item item_;
};

class OutOfRange : public Error {
  public:
    OutOfRange(Item item, long long value)
        : Error("score " + std::to_string(value) + " out of range for " + std::string(item_name(item))), item_(item),
          value_(value) {}
    Item item() const { return item_; }
    long long value() const { return value_; }

  private:
    Item item_;
    long long value_;
};

/// Reads `<Item>: <integer>` lines, tolerating bullets, numbering, bold markers and brackets.
/// The first line per item wins; all ten items are required.
AffectScores parse_scores(std::string_view completion, bool allow_undecided = false);

struct ItemReasoning {
    int score{0};
    std::string reasoning;
};

struct CoTResponse {
    std::array<ItemReasoning, kItemCount> items;
    AffectScores scores() const;
};

/// Per item: the integer after the header and the text up to the next item header.
CoTResponse parse_cot(std::string_view completion, bool allow_undecided = false);

/// "Active: 3\n...\nAfraid: 1" (no trailing newline).
std::string render_answer_block(const AffectScores& scores);

} // namespace affectsense
