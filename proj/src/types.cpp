#include "gae/types.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gae/error.hpp"

namespace gae {

Roster::Roster(std::vector<AvatarIndex> members) : members_(std::move(members)) {
  if (members_.size() > kTeamSize) {
    throw ContractError(fmt::format("roster has {} members, at most {} allowed", members_.size(),
                                    kTeamSize));
  }
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw ContractError("roster contains a duplicate avatar");
  }
}

bool Roster::contains(AvatarIndex avatar) const {
  return std::binary_search(members_.begin(), members_.end(), avatar);
}

bool Roster::overlaps(const Roster& other) const {
  return std::any_of(members_.begin(), members_.end(),
                     [&](AvatarIndex a) { return other.contains(a); });
}

Roster Roster::with(AvatarIndex avatar) const {
  std::vector<AvatarIndex> next = members_;
  next.push_back(avatar);
  return Roster(std::move(next));
}

void Roster::check_indices(std::size_t num_avatars) const {
  for (AvatarIndex a : members_) {
    if (a >= num_avatars) {
      throw ContractError(fmt::format("avatar index {} out of range (N = {})", a, num_avatars));
    }
  }
}

void check_disjoint(const Roster& red, const Roster& blue, std::size_t num_avatars) {
  red.check_indices(num_avatars);
  blue.check_indices(num_avatars);
  if (red.overlaps(blue)) {
    throw ContractError("an avatar appears on both teams");
  }
}

void validate_match(const MatchRecord& match, std::size_t num_avatars) {
  if (!match.red.full() || !match.blue.full()) {
    throw ContractError(fmt::format("match rosters must have {} members each (got {} and {})",
                                    kTeamSize, match.red.size(), match.blue.size()));
  }
  check_disjoint(match.red, match.blue, num_avatars);
  if (match.outcome != 0 && match.outcome != 1) {
    throw ContractError(fmt::format("match outcome must be 0 or 1, got {}", match.outcome));
  }
}

AvatarRegistry::AvatarRegistry(std::vector<std::string> names) {
  for (const auto& name : names) {
    if (find(name)) {
      throw ContractError(fmt::format("duplicate avatar name '{}'", name));
    }
    intern(name);
  }
}

AvatarIndex AvatarRegistry::intern(std::string_view name) {
  if (name.empty()) {
    throw ContractError("avatar names must be non-empty");
  }
  if (auto existing = find(name)) {
    return *existing;
  }
  const AvatarIndex index = names_.size();
  names_.emplace_back(name);
  index_.emplace(names_.back(), index);
  return index;
}

std::optional<AvatarIndex> AvatarRegistry::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

AvatarIndex AvatarRegistry::at(std::string_view name) const {
  if (auto index = find(name)) {
    return *index;
  }
  throw ContractError(fmt::format("unknown avatar '{}'", name));
}

const std::string& AvatarRegistry::name(AvatarIndex index) const {
  if (index >= names_.size()) {
    throw ContractError(fmt::format("avatar index {} out of range (N = {})", index, names_.size()));
  }
  return names_[index];
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.registry = registry;
  out.matches.reserve(indices.size());
  for (std::size_t i : indices) {
    out.matches.push_back(matches.at(i));
  }
  return out;
}

void Dataset::validate() const {
  for (const auto& m : matches) {
    validate_match(m, registry.size());
  }
}

}  // namespace gae
