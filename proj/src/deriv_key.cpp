#include "pinnsolve/deriv_key.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace pinnsolve {

DerivKey canonical(DerivKey key) {
    std::sort(key.begin(), key.end());
    return key;
}

DerivKey repeated(int axis, int n) { return DerivKey(static_cast<std::size_t>(n), axis); }

namespace {

bool key_less(const DerivKey& a, const DerivKey& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

void collect_subsets(const DerivKey& key, std::set<DerivKey, decltype(&key_less)>& out) {
    const std::size_t n = key.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        DerivKey sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) sub.push_back(key[i]);
        out.insert(sub);
    }
}

// Restricted-growth enumeration of set partitions of {0..n-1}.
void enumerate_partitions(std::size_t n, std::vector<int>& block_of, std::size_t pos, int blocks,
                          std::vector<std::vector<int>>& out) {
    if (pos == n) {
        out.push_back(block_of);
        return;
    }
    for (int b = 0; b <= blocks; ++b) {
        block_of[pos] = b;
        enumerate_partitions(n, block_of, pos + 1, std::max(blocks, b + 1), out);
    }
}

}  // namespace

KeySet::KeySet() : keys_{DerivKey{}} { finalize(); }

KeySet::KeySet(std::span<const DerivKey> required) {
    std::set<DerivKey, decltype(&key_less)> all(&key_less);
    all.insert(DerivKey{});
    for (const DerivKey& k : required) collect_subsets(canonical(k), all);
    keys_.assign(all.begin(), all.end());
    finalize();
}

int KeySet::index_of(const DerivKey& key) const {
    const auto it = std::find(keys_.begin(), keys_.end(), key);
    return it == keys_.end() ? -1 : static_cast<int>(it - keys_.begin());
}

void KeySet::finalize() {
    max_order_ = 0;
    partitions_.assign(keys_.size(), {});
    splits_.assign(keys_.size(), {});
    for (std::size_t k = 0; k < keys_.size(); ++k) {
        const DerivKey& key = keys_[k];
        const std::size_t n = key.size();
        max_order_ = std::max(max_order_, static_cast<int>(n));

        std::vector<std::vector<int>> assignments;
        std::vector<int> block_of(n, 0);
        enumerate_partitions(n, block_of, 0, 0, assignments);
        for (const auto& assignment : assignments) {
            const int nblocks = n == 0 ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
            std::vector<int> blocks;
            for (int b = 0; b < nblocks; ++b) {
                DerivKey block;
                for (std::size_t i = 0; i < n; ++i)
                    if (assignment[i] == b) block.push_back(key[i]);
                blocks.push_back(index_of(block));
            }
            partitions_[k].push_back(std::move(blocks));
        }

        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            DerivKey a;
            DerivKey b;
            for (std::size_t i = 0; i < n; ++i)
                ((mask & (std::size_t{1} << i)) ? a : b).push_back(key[i]);
            splits_[k].emplace_back(index_of(a), index_of(b));
        }
    }
}

}  // namespace pinnsolve
