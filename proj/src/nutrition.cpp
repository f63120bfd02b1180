#include "healthyplate/nutrition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "healthyplate/error.hpp"

namespace hplate {

namespace {

constexpr double kFruitVegTarget = 50.0;
constexpr double kProteinTarget = 25.0;
constexpr double kGrainTarget = 25.0;
// Surplus smaller than this is rounding noise, not a recommendation.
constexpr double kSurplusEpsilon = 1e-9;

struct CategoryKey {
    const char* key;
    Category category;
};
constexpr std::array<CategoryKey, 6> kConfigKeys{{{"fruit", Category::Fruit},
                                                  {"vegetable", Category::Vegetable},
                                                  {"protein", Category::HealthyProtein},
                                                  {"whole_grain", Category::WholeGrain},
                                                  {"junk", Category::Junk},
                                                  {"plate", Category::PlateSurface}}};

void check_percentage(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 100.0)
        fail(ErrorKind::InvalidArgument, std::string(name) + " must be a percentage in [0, 100]");
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", v);
    return buf;
}

std::string join(const std::vector<std::string>& words, std::size_t limit) {
    std::string out;
    for (std::size_t i = 0; i < words.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += words[i];
    }
    return out;
}

} // namespace

std::string_view to_string(Category category) noexcept {
    switch (category) {
        case Category::Fruit: return "fruit";
        case Category::Vegetable: return "vegetable";
        case Category::HealthyProtein: return "protein";
        case Category::WholeGrain: return "whole_grain";
        case Category::Junk: return "junk";
        case Category::PlateSurface: return "plate";
    }
    return "junk";
}

void Taxonomy::add(const std::string& label, Category category) {
    const auto [it, inserted] = entries_.emplace(label, category);
    if (!inserted && it->second != category)
        fail(ErrorKind::InvalidArgument, "label '" + label + "' is listed under two categories");
}

Category Taxonomy::category_of(const std::string& label) const {
    const auto it = entries_.find(label);
    return it == entries_.end() ? Category::Junk : it->second;
}

std::vector<std::string> Taxonomy::labels_in(Category category) const {
    std::vector<std::string> out;
    for (const auto& [label, c] : entries_)
        if (c == category) out.push_back(label);
    return out;
}

Taxonomy Taxonomy::default_taxonomy() {
    Taxonomy t;
    for (const char* l : {"apple", "orange", "banana", "grapes"}) t.add(l, Category::Fruit);
    for (const char* l : {"broccoli", "red cabbage", "carrot", "tomato", "cucumber"}) t.add(l, Category::Vegetable);
    for (const char* l : {"fish", "chicken", "beans", "lentils", "nuts", "egg"}) t.add(l, Category::HealthyProtein);
    for (const char* l : {"rice", "buckwheat", "wheat", "oats"}) t.add(l, Category::WholeGrain);
    for (const char* l : {"potato", "fries", "chips"}) t.add(l, Category::Junk);
    for (const char* l : {"plate", "background"}) t.add(l, Category::PlateSurface);
    return t;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail(ErrorKind::InvalidArgument, "taxonomy must be a JSON object");
    Taxonomy t;
    for (const auto& [key, value] : doc.items()) {
        const auto match = std::find_if(kConfigKeys.begin(), kConfigKeys.end(),
                                        [&](const CategoryKey& k) { return key == k.key; });
        if (match == kConfigKeys.end()) fail(ErrorKind::InvalidArgument, "unknown taxonomy key '" + key + "'");
        if (!value.is_array()) fail(ErrorKind::InvalidArgument, "taxonomy entry '" + key + "' must be a list");
        for (const auto& label : value) {
            if (!label.is_string()) fail(ErrorKind::InvalidArgument, "taxonomy labels must be strings");
            t.add(label.get<std::string>(), match->category);
        }
    }
    // The plate surface is always excluded, even when the config omits it.
    if (!t.entries_.contains("plate")) t.add("plate", Category::PlateSurface);
    return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open taxonomy " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, "malformed taxonomy " + path.string() + ": " + e.what());
    }
}

nlohmann::json Taxonomy::to_json() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& k : kConfigKeys) doc[k.key] = labels_in(k.category);
    return doc;
}

CategoryShares class_fractions(const std::vector<FoodItem>& items) {
    CategoryShares shares;
    bool any_food = false;
    for (const auto& item : items) {
        const double pct = 100.0 * item.fraction;
        switch (item.category) {
            case Category::Fruit: shares.fruit += pct; break;
            case Category::Vegetable: shares.vegetable += pct; break;
            case Category::HealthyProtein: shares.protein += pct; break;
            case Category::WholeGrain: shares.whole_grain += pct; break;
            case Category::Junk: shares.junk += pct; break;
            case Category::PlateSurface: continue;
        }
        any_food = true;
    }
    if (!any_food) fail(ErrorKind::NoFood, "no food items on plate");
    return shares;
}

double balance_level(double fruit, double vegetable, double protein, double whole_grain) {
    check_percentage(fruit, "fruit");
    check_percentage(vegetable, "vegetable");
    check_percentage(protein, "protein");
    check_percentage(whole_grain, "whole grain");
    return std::min(fruit + vegetable, kFruitVegTarget) + std::min(protein, kProteinTarget) +
           std::min(whole_grain, kGrainTarget);
}

double healthy_fraction(double fruit, double vegetable, double protein, double whole_grain) {
    check_percentage(fruit, "fruit");
    check_percentage(vegetable, "vegetable");
    check_percentage(protein, "protein");
    check_percentage(whole_grain, "whole grain");
    return (fruit + vegetable + protein + whole_grain) / 100.0;
}

HealthBand band_of(double balance) {
    check_percentage(balance, "balance level");
    const double error = 100.0 - balance;
    if (error <= 25.0) return {"Healthy food", error};
    if (error <= 50.0) return {"Moderately healthy", error};
    if (error <= 75.0) return {"Needs improvement", error};
    return {"Not a healthy plate", error};
}

std::vector<std::string> recommend(const PlateAssessment& assessment, const Taxonomy& taxonomy) {
    const auto& s = assessment.shares;
    const double fv = s.fruit + s.vegetable;

    struct Note {
        double magnitude;
        std::string text;
    };
    std::vector<Note> notes;

    auto examples = [&](Category c) {
        const auto labels = taxonomy.labels_in(c);
        return labels.empty() ? std::string() : " (e.g. " + join(labels, 3) + ")";
    };

    if (fv < kFruitVegTarget) {
        auto produce = taxonomy.labels_in(Category::Vegetable);
        const auto fruit = taxonomy.labels_in(Category::Fruit);
        produce.insert(produce.end(), fruit.begin(), fruit.end());
        notes.push_back({kFruitVegTarget - fv,
                         "Add fruits and vegetables: they cover " + percent(fv) +
                             " of the food; fill half the plate with colorful fruits and veggies" +
                             (produce.empty() ? std::string() : " (e.g. " + join(produce, 3) + ")") + "."});
    }
    if (s.protein < kProteinTarget)
        notes.push_back({kProteinTarget - s.protein, "Add a healthy protein" + examples(Category::HealthyProtein) +
                                                          ": currently " + percent(s.protein) +
                                                          ", aim for a quarter of the plate."});
    if (s.whole_grain < kGrainTarget)
        notes.push_back({kGrainTarget - s.whole_grain, "Add whole grains" + examples(Category::WholeGrain) +
                                                            ": currently " + percent(s.whole_grain) +
                                                            ", aim for a quarter of the plate."});
    if (s.junk > 0.0) {
        std::set<std::string> junk_labels;
        for (const auto& item : assessment.items)
            if (item.category == Category::Junk) junk_labels.insert(item.label);
        const std::vector<std::string> named(junk_labels.begin(), junk_labels.end());
        notes.push_back({s.junk, "Reduce junk items" + (named.empty() ? std::string() : " (" + join(named, named.size()) + ")") +
                                     ": they make up " + percent(s.junk) + " of the food."});
    }
    if (fv - kFruitVegTarget > kSurplusEpsilon)
        notes.push_back({fv - kFruitVegTarget, "Fruits and vegetables take " + percent(fv) +
                                                   ", above the half-plate target; the surplus does not raise the "
                                                   "balance level, so use that space for protein or whole grains."});
    if (s.protein - kProteinTarget > kSurplusEpsilon)
        notes.push_back({s.protein - kProteinTarget, "Protein takes " + percent(s.protein) +
                                                          ", above the quarter-plate target; the surplus is capped "
                                                          "in the balance level."});
    if (s.whole_grain - kGrainTarget > kSurplusEpsilon)
        notes.push_back({s.whole_grain - kGrainTarget, "Whole grains take " + percent(s.whole_grain) +
                                                            ", above the quarter-plate target; the surplus is capped "
                                                            "in the balance level."});

    std::stable_sort(notes.begin(), notes.end(), [](const Note& a, const Note& b) { return a.magnitude > b.magnitude; });
    std::vector<std::string> out;
    out.reserve(notes.size());
    for (auto& n : notes) out.push_back(std::move(n.text));
    return out;
}

PlateAssessment assess(const std::vector<FoodItem>& items, const Taxonomy& taxonomy) {
    PlateAssessment a;
    a.shares = class_fractions(items);
    for (const auto& item : items)
        if (item.category != Category::PlateSurface) a.items.push_back(item);
    const auto& s = a.shares;
    a.balance = balance_level(std::min(s.fruit, 100.0), std::min(s.vegetable, 100.0), std::min(s.protein, 100.0),
                              std::min(s.whole_grain, 100.0));
    a.healthy = healthy_fraction(std::min(s.fruit, 100.0), std::min(s.vegetable, 100.0), std::min(s.protein, 100.0),
                                 std::min(s.whole_grain, 100.0));
    a.band = band_of(std::min(a.balance, 100.0));
    a.recommendations = recommend(a, taxonomy);
    return a;
}

nlohmann::json to_json(const FoodItem& item) {
    return {{"region_id", item.region_id},
            {"label", item.label},
            {"category", std::string(to_string(item.category))},
            {"pixels", item.pixel_count},
            {"fraction", item.fraction}};
}

nlohmann::json to_json(const PlateAssessment& a) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : a.items) items.push_back(to_json(item));
    return {{"f", a.shares.fruit},
            {"v", a.shares.vegetable},
            {"hp", a.shares.protein},
            {"wg", a.shares.whole_grain},
            {"junk", a.shares.junk},
            {"T", a.total},
            {"B", a.balance},
            {"B_rounded", std::lround(a.balance)},
            {"H", a.healthy},
            {"H_percent", std::lround(100.0 * a.healthy)},
            {"band", a.band.name},
            {"error", a.band.error},
            {"recommendations", a.recommendations},
            {"items", items}};
}

} // namespace hplate
