#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hplate {

enum class Category { Fruit, Vegetable, HealthyProtein, WholeGrain, Junk, PlateSurface };

std::string_view to_string(Category category) noexcept;

// Food label -> plate category. Labels that are not listed count as junk.
class Taxonomy {
public:
    Taxonomy() = default;

    // Fails if the label is already mapped to a different category.
    void add(const std::string& label, Category category);
    Category category_of(const std::string& label) const;
    const std::map<std::string, Category>& entries() const noexcept { return entries_; }
    std::vector<std::string> labels_in(Category category) const;

    static Taxonomy default_taxonomy();
    // Keys: fruit, vegetable, protein, whole_grain, junk, and optionally plate.
    static Taxonomy from_json(const nlohmann::json& doc);
    static Taxonomy load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

private:
    std::map<std::string, Category> entries_;
};

struct FoodItem {
    int region_id = 0;
    std::string label;
    Category category = Category::Junk;
    std::size_t pixel_count = 0;
    double fraction = 0.0; // of the plate's food pixels
};

// Per-category percentages of the food area.
struct CategoryShares {
    double fruit = 0.0;
    double vegetable = 0.0;
    double protein = 0.0;
    double whole_grain = 0.0;
    double junk = 0.0;

    double healthy() const noexcept { return fruit + vegetable + protein + whole_grain; }
};

// Sums item fractions per category, as percentages.
CategoryShares class_fractions(const std::vector<FoodItem>& items);

// min(f + v, 50) + min(hp, 25) + min(wg, 25)
double balance_level(double fruit, double vegetable, double protein, double whole_grain);

// (f + v + hp + wg) / T with the food total T normalized to 100.
double healthy_fraction(double fruit, double vegetable, double protein, double whole_grain);

struct HealthBand {
    std::string name;
    double error = 0.0; // 100 - B
};

HealthBand band_of(double balance);

struct PlateAssessment {
    CategoryShares shares;
    double total = 100.0;
    double balance = 0.0;
    double healthy = 0.0;
    HealthBand band;
    std::vector<std::string> recommendations;
    std::vector<FoodItem> items;
};

std::vector<std::string> recommend(const PlateAssessment& assessment, const Taxonomy& taxonomy);

// Fractions, scores, band and recommendations for a set of classified items.
PlateAssessment assess(const std::vector<FoodItem>& items, const Taxonomy& taxonomy);

nlohmann::json to_json(const FoodItem& item);
nlohmann::json to_json(const PlateAssessment& assessment);

} // namespace hplate
