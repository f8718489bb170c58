#include "mmspc/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace mmspc {

namespace {

int element_polarity(ConnectionElement e) {
    switch (e) {
        case ConnectionElement::SeriesPlus:
            return 1;
        case ConnectionElement::SeriesMinus:
            return -1;
        default:
            return 0;
    }
}

ConnectionElement series_of_sign(int sign) {
    return sign > 0 ? ConnectionElement::SeriesPlus : ConnectionElement::SeriesMinus;
}

int sign_of(int v) { return (v > 0) - (v < 0); }

void require_valid_size(int n) {
    if (n < 1 || n > 12) {
        throw std::invalid_argument("module count out of range: " + std::to_string(n));
    }
}

}  // namespace

bool is_series(ConnectionElement e) {
    return e == ConnectionElement::SeriesPlus || e == ConnectionElement::SeriesMinus;
}

// =============================================================================
// Layout
// =============================================================================

std::size_t GroupLayout::group_of(std::size_t module) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (module >= groups[g].first && module <= groups[g].last) {
            return g;
        }
    }
    throw std::out_of_range("module index outside layout");
}

int GroupLayout::polarity_of(std::size_t module) const {
    return groups[group_of(module)].polarity;
}

std::size_t GroupLayout::active_groups() const {
    return static_cast<std::size_t>(std::count_if(
        groups.begin(), groups.end(), [](const Group& g) { return g.polarity != 0; }));
}

GroupLayout decompose_groups(const StringState& state) {
    GroupLayout layout;
    const std::size_t n = state.size();
    if (n == 0) {
        return layout;
    }
    Group current{0, 0, element_polarity(state[n - 1])};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (state[i] == ConnectionElement::Parallel) {
            current.last = i + 1;
            continue;
        }
        layout.groups.push_back(current);
        current = Group{i + 1, i + 1, element_polarity(state[i])};
    }
    layout.groups.push_back(current);
    for (const auto& g : layout.groups) {
        layout.level += g.polarity;
    }
    return layout;
}

int state_level(const StringState& state) {
    // Same as decompose_groups(state).level without building the groups.
    const std::size_t n = state.size();
    if (n == 0) {
        return 0;
    }
    int level = element_polarity(state[n - 1]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        level += element_polarity(state[i]);
    }
    return level;
}

// =============================================================================
// Canonical indexing
// =============================================================================

std::size_t state_count(int n) {
    require_valid_size(n);
    return std::size_t{1} << (2 * n);
}

std::size_t state_index(const StringState& state) {
    std::size_t idx = 0;
    for (auto e : state) {
        idx = idx * 4 + static_cast<std::size_t>(e);
    }
    return idx;
}

StringState state_from_index(std::size_t index, int n) {
    require_valid_size(n);
    StringState s(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = static_cast<ConnectionElement>(index % 4);
        index /= 4;
    }
    return s;
}

std::vector<StringState> all_states(int n) {
    const std::size_t count = state_count(n);
    std::vector<StringState> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(state_from_index(k, n));
    }
    return out;
}

std::vector<StringState> all_states_for_level(int n, int level) {
    require_valid_size(n);
    if (std::abs(level) > n) {
        throw std::invalid_argument("level " + std::to_string(level) +
                                    " outside [-N, N] for N = " + std::to_string(n));
    }
    std::vector<StringState> out;
    const std::size_t count = state_count(n);
    for (std::size_t k = 0; k < count; ++k) {
        auto s = state_from_index(k, n);
        if (state_level(s) == level) {
            out.push_back(std::move(s));
        }
    }
    return out;
}

int toggle_count(const StringState& a, const StringState& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("state length mismatch");
    }
    int c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        c += a[i] != b[i];
    }
    return c;
}

StringState mirrored(const StringState& state) {
    StringState out = state;
    for (auto& e : out) {
        if (e == ConnectionElement::SeriesPlus) {
            e = ConnectionElement::SeriesMinus;
        } else if (e == ConnectionElement::SeriesMinus) {
            e = ConnectionElement::SeriesPlus;
        }
    }
    return out;
}

StringState bypassed_state(int n) {
    require_valid_size(n);
    StringState s(static_cast<std::size_t>(n), ConnectionElement::Parallel);
    s.back() = ConnectionElement::Bypass;
    return s;
}

// =============================================================================
// Transitions
// =============================================================================

bool transition_allowed(const StringState& from, const StringState& to) {
    const int lf = state_level(from);
    const int lt = state_level(to);
    const int away = std::abs(lt) - std::abs(lf);
    for (std::size_t i = 0; i < from.size(); ++i) {
        const auto a = from[i];
        const auto b = to[i];
        if (a == b) {
            continue;
        }
        if (away > 0) {
            if (is_series(a) || b != series_of_sign(sign_of(lt))) {
                return false;
            }
        } else if (away < 0) {
            if (!is_series(a) || is_series(b)) {
                return false;
            }
        } else if (is_series(b) && (lt == 0 || b != series_of_sign(sign_of(lt)))) {
            return false;
        }
    }
    return true;
}

std::vector<StringState> enumerate_transitions(const StringState& state, int level_delta,
                                               int toggle_limit) {
    if (toggle_limit < 1) {
        throw std::invalid_argument("toggle_limit must be >= 1");
    }
    if (level_delta < -1 || level_delta > 1) {
        throw std::invalid_argument("level_delta must be -1, 0 or +1");
    }
    const std::size_t n = state.size();
    const int target = state_level(state) + level_delta;
    const int limit = std::min<int>(toggle_limit, static_cast<int>(n));

    std::vector<StringState> out;
    if (level_delta == 0) {
        out.push_back(state);
    }

    // Walk all position subsets of size 1..limit, and for each all choices of new kinds.
    std::vector<std::size_t> pos;
    StringState cand = state;
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        if (!pos.empty()) {
            if (state_level(cand) == target && transition_allowed(state, cand)) {
                out.push_back(cand);
            }
        }
        if (static_cast<int>(pos.size()) == limit) {
            return;
        }
        for (std::size_t p = start; p < n; ++p) {
            for (int k = 0; k < 4; ++k) {
                const auto e = static_cast<ConnectionElement>(k);
                if (e == state[p]) {
                    continue;
                }
                cand[p] = e;
                pos.push_back(p);
                self(self, p + 1);
                pos.pop_back();
                cand[p] = state[p];
            }
        }
    };
    recurse(recurse, 0);

    std::sort(out.begin(), out.end(),
              [](const StringState& a, const StringState& b) { return state_index(a) < state_index(b); });
    return out;
}

// =============================================================================
// Text notation
// =============================================================================

std::string to_string(const StringState& state) {
    std::string s;
    for (auto e : state) {
        switch (e) {
            case ConnectionElement::Parallel:
                s += "P";
                break;
            case ConnectionElement::SeriesPlus:
                s += "S+";
                break;
            case ConnectionElement::SeriesMinus:
                s += "S-";
                break;
            case ConnectionElement::Bypass:
                s += "B";
                break;
        }
    }
    return s;
}

StringState parse_state(std::string_view text) {
    StringState s;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == 'P') {
            s.push_back(ConnectionElement::Parallel);
            ++i;
        } else if (c == 'B') {
            s.push_back(ConnectionElement::Bypass);
            ++i;
        } else if (c == 'S' && i + 1 < text.size() && (text[i + 1] == '+' || text[i + 1] == '-')) {
            s.push_back(text[i + 1] == '+' ? ConnectionElement::SeriesPlus
                                           : ConnectionElement::SeriesMinus);
            i += 2;
        } else {
            throw std::invalid_argument("bad state token at position " + std::to_string(i) +
                                        " in \"" + std::string(text) + "\"");
        }
    }
    if (s.empty()) {
        throw std::invalid_argument("empty state string");
    }
    return s;
}

}  // namespace mmspc
