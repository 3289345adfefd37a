#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace teamdesign {

using ChampionId = std::string;
using PlayerId = std::string;

inline constexpr int kTeamSize = 5;

enum class Region { KR, NA, EUW, SYN };
enum class Tier { Bronze, Silver, Gold, Platinum, Diamond, Master, Challenger };
enum class Side { Top, Bottom };
enum class Outcome { Win, Loss };

inline constexpr int kTierCount = 7;
inline constexpr std::array<Tier, kTierCount> kAllTiers = {
    Tier::Bronze,  Tier::Silver, Tier::Gold,      Tier::Platinum,
    Tier::Diamond, Tier::Master, Tier::Challenger};

std::string_view to_string(Region r);
std::string_view to_string(Tier t);
std::string_view to_string(Side s);
std::string_view to_string(Outcome o);

std::optional<Region> parse_region(std::string_view s);
std::optional<Tier> parse_tier(std::string_view s);
std::optional<Side> parse_side(std::string_view s);
std::optional<Outcome> parse_outcome(std::string_view s);

inline Side opposite(Side s) { return s == Side::Top ? Side::Bottom : Side::Top; }
inline Outcome opposite(Outcome o) { return o == Outcome::Win ? Outcome::Loss : Outcome::Win; }

/// Base for all errors raised by the library. The kind drives CLI exit codes
/// and HTTP status mapping.
class Error : public std::runtime_error {
 public:
  enum class Kind { InvalidArgument, Data, NotFound, Illegal, Convergence, Provider, Auth };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline Error invalid_argument(const std::string& m) { return {Error::Kind::InvalidArgument, m}; }
inline Error data_error(const std::string& m) { return {Error::Kind::Data, m}; }
inline Error not_found(const std::string& m) { return {Error::Kind::NotFound, m}; }

}  // namespace teamdesign
