#pragma once

#include <span>
#include <string>
#include <vector>

namespace pinnsolve {

/// A partial-derivative request: nondecreasing list of axis indices.
/// {} is the value itself, {1,1} is the second derivative along axis 1.
using DerivKey = std::vector<int>;

/// Canonical (sorted) copy of a key.
DerivKey canonical(DerivKey key);

/// Key for the n-th derivative along one axis.
DerivKey repeated(int axis, int n);

/// Closed set of derivative keys: contains every sub-multiset of its members,
/// ordered by (order, lexicographic), so index 0 is always the value key.
class KeySet {
public:
    KeySet();
    explicit KeySet(std::span<const DerivKey> required);

    std::size_t size() const noexcept { return keys_.size(); }
    const std::vector<DerivKey>& keys() const noexcept { return keys_; }
    const DerivKey& key(std::size_t i) const { return keys_.at(i); }
    int index_of(const DerivKey& key) const;
    bool contains(const DerivKey& key) const { return index_of(key) >= 0; }
    int max_order() const noexcept { return max_order_; }

    /// All set partitions of the positions of key `k`; each partition is a list
    /// of block keys given as indices into this set.
    const std::vector<std::vector<int>>& partitions(std::size_t k) const { return partitions_.at(k); }

    /// Leibniz expansion of key `k`: pairs (i, j) such that the key is the
    /// multiset union of key i and key j, one entry per subset of positions.
    const std::vector<std::pair<int, int>>& splits(std::size_t k) const { return splits_.at(k); }

private:
    void finalize();

    std::vector<DerivKey> keys_;
    std::vector<std::vector<std::vector<int>>> partitions_;
    std::vector<std::vector<std::pair<int, int>>> splits_;
    int max_order_ = 0;
};

}  // namespace pinnsolve
