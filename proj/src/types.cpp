#include "teamdesign/types.hpp"

namespace teamdesign {
namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table)
    if (name == s) return value;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E e, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table)
    if (value == e) return name;
  return "?";
}

constexpr std::array<std::pair<Region, std::string_view>, 4> kRegions{{
    {Region::KR, "KR"}, {Region::NA, "NA"}, {Region::EUW, "EUW"}, {Region::SYN, "SYN"}}};

constexpr std::array<std::pair<Tier, std::string_view>, 7> kTiers{{{Tier::Bronze, "Bronze"},
                                                                   {Tier::Silver, "Silver"},
                                                                   {Tier::Gold, "Gold"},
                                                                   {Tier::Platinum, "Platinum"},
                                                                   {Tier::Diamond, "Diamond"},
                                                                   {Tier::Master, "Master"},
                                                                   {Tier::Challenger, "Challenger"}}};

constexpr std::array<std::pair<Side, std::string_view>, 2> kSides{
    {{Side::Top, "Top"}, {Side::Bottom, "Bottom"}}};

constexpr std::array<std::pair<Outcome, std::string_view>, 2> kOutcomes{
    {{Outcome::Win, "Win"}, {Outcome::Loss, "Loss"}}};

}  // namespace

std::string_view to_string(Region r) { return name_of(r, kRegions); }
std::string_view to_string(Tier t) { return name_of(t, kTiers); }
std::string_view to_string(Side s) { return name_of(s, kSides); }
std::string_view to_string(Outcome o) { return name_of(o, kOutcomes); }

std::optional<Region> parse_region(std::string_view s) { return lookup(s, kRegions); }
std::optional<Tier> parse_tier(std::string_view s) { return lookup(s, kTiers); }
std::optional<Side> parse_side(std::string_view s) { return lookup(s, kSides); }
std::optional<Outcome> parse_outcome(std::string_view s) { return lookup(s, kOutcomes); }

}  // namespace teamdesign
