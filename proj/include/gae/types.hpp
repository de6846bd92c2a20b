#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gae {

using AvatarIndex = std::size_t;

/// Players per team in a full match.
inline constexpr std::size_t kTeamSize = 5;

/// A set of avatars on one side. Members are kept sorted, and two rosters
/// with the same members compare equal regardless of pick order. Partial
/// rosters (fewer than five members, including empty) are allowed; only full
/// match records require exactly five.
class Roster {
 public:
  Roster() = default;
  explicit Roster(std::vector<AvatarIndex> members);
  Roster(std::initializer_list<AvatarIndex> members)
      : Roster(std::vector<AvatarIndex>(members)) {}

  [[nodiscard]] std::span<const AvatarIndex> members() const { return members_; }
  [[nodiscard]] std::size_t size() const { return members_.size(); }
  [[nodiscard]] bool empty() const { return members_.empty(); }
  [[nodiscard]] bool full() const { return members_.size() == kTeamSize; }
  [[nodiscard]] bool contains(AvatarIndex avatar) const;
  [[nodiscard]] bool overlaps(const Roster& other) const;

  /// Copy of this roster with one more member.
  [[nodiscard]] Roster with(AvatarIndex avatar) const;

  /// Throws ContractError when any member is >= num_avatars.
  void check_indices(std::size_t num_avatars) const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const Roster&, const Roster&) = default;

 private:
  std::vector<AvatarIndex> members_;
};

/// Throws ContractError unless both rosters are in range and disjoint.
void check_disjoint(const Roster& red, const Roster& blue, std::size_t num_avatars);

struct MatchRecord {
  Roster red;
  Roster blue;
  int outcome = 0;  // 1 when red wins

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

/// Full 5v5, disjoint, in range, outcome in {0,1}.
void validate_match(const MatchRecord& match, std::size_t num_avatars);

/// Dense, order-preserving mapping between avatar names and indices.
class AvatarRegistry {
 public:
  AvatarRegistry() = default;
  explicit AvatarRegistry(std::vector<std::string> names);

  /// Index of `name`, appending it when new. Names must be non-empty.
  AvatarIndex intern(std::string_view name);

  [[nodiscard]] std::optional<AvatarIndex> find(std::string_view name) const;
  /// Throws ContractError naming the avatar when unknown.
  [[nodiscard]] AvatarIndex at(std::string_view name) const;
  [[nodiscard]] const std::string& name(AvatarIndex index) const;
  [[nodiscard]] std::span<const std::string> names() const { return names_; }
  [[nodiscard]] std::size_t size() const { return names_.size(); }

  friend bool operator==(const AvatarRegistry& a, const AvatarRegistry& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, AvatarIndex> index_;
};

struct Dataset {
  AvatarRegistry registry;
  std::vector<MatchRecord> matches;

  [[nodiscard]] std::size_t size() const { return matches.size(); }
  [[nodiscard]] bool empty() const { return matches.empty(); }

  /// Matches at `indices`, in that order, sharing this registry.
  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;

  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace gae
