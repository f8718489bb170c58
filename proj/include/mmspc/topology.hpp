#pragma once

// =============================================================================
// String-state algebra: connection elements, parallel groups, output level
// and toggle-limited transitions.
// =============================================================================

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mmspc {

/// Connection between two adjacent modules, or between module N and the terminals.
/// The numeric values define the canonical order P < S+ < S- < B.
enum class ConnectionElement : std::uint8_t {
    Parallel = 0,
    SeriesPlus = 1,
    SeriesMinus = 2,
    Bypass = 3,
};

/// Element i (0-based, i < N-1) joins module i and module i+1; element N-1 is the
/// output-terminal connection and sets the polarity of the first group.
using StringState = std::vector<ConnectionElement>;

/// Contiguous run of modules [first, last] inserted with the given polarity.
struct Group {
    std::size_t first = 0;
    std::size_t last = 0;
    int polarity = 0;

    [[nodiscard]] std::size_t size() const { return last - first + 1; }
};

struct GroupLayout {
    std::vector<Group> groups;
    int level = 0;

    /// Index of the group containing module i.
    [[nodiscard]] std::size_t group_of(std::size_t module) const;
    /// Insertion polarity seen by module i.
    [[nodiscard]] int polarity_of(std::size_t module) const;
    [[nodiscard]] std::size_t active_groups() const;
};

[[nodiscard]] GroupLayout decompose_groups(const StringState& state);
[[nodiscard]] int state_level(const StringState& state);

/// States reachable with at most toggle_limit element changes whose level differs
/// by exactly level_delta. Moving away from level 0 only turns P/B elements into
/// series elements of the target sign; moving towards 0 only turns series elements
/// into P/B; level-preserving moves never introduce a series element of the opposite
/// sign. Result is sorted in canonical order and may be empty.
[[nodiscard]] std::vector<StringState> enumerate_transitions(const StringState& state,
                                                             int level_delta,
                                                             int toggle_limit);

/// True when the change from `from` to `to` obeys the direction rule above.
[[nodiscard]] bool transition_allowed(const StringState& from, const StringState& to);

/// Every state of n modules with the given level, canonical order.
[[nodiscard]] std::vector<StringState> all_states_for_level(int n, int level);

/// Every one of the 4^n states, canonical order.
[[nodiscard]] std::vector<StringState> all_states(int n);

/// Rank of the state in canonical order (base-4 number, element 0 most significant).
[[nodiscard]] std::size_t state_index(const StringState& state);
[[nodiscard]] StringState state_from_index(std::size_t index, int n);
[[nodiscard]] std::size_t state_count(int n);

/// Number of differing elements.
[[nodiscard]] int toggle_count(const StringState& a, const StringState& b);

/// S+ and S- swapped.
[[nodiscard]] StringState mirrored(const StringState& state);

/// Token notation such as "PPS+PS+".
[[nodiscard]] std::string to_string(const StringState& state);
[[nodiscard]] StringState parse_state(std::string_view text);

/// Level-0 state with every module bypassed through the terminal.
[[nodiscard]] StringState bypassed_state(int n);

[[nodiscard]] bool is_series(ConnectionElement e);

}  // namespace mmspc
