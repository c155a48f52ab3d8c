#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace proxsim {

/// Tagged integer identifier. Distinct tags do not convert into each other.
template <class Tag>
struct Id {
    std::uint64_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint64_t v) : value(v) {}

    friend constexpr auto operator<=>(Id, Id) = default;
    friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using UserId = Id<struct UserIdTag>;
using SocialId = Id<struct SocialIdTag>;
using PageId = Id<struct PageIdTag>;
using PhotoId = Id<struct PhotoIdTag>;
using EventId = Id<struct EventIdTag>;
using SelectorId = Id<struct SelectorIdTag>;
using IdentityId = Id<struct IdentityIdTag>;

} // namespace proxsim

template <class Tag>
struct std::hash<proxsim::Id<Tag>> {
    std::size_t operator()(proxsim::Id<Tag> id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
