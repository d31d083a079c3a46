// Keyword-indexed public bulletin board and content-addressed data dispersal
// network. The bulletin board models a blockchain as a total-order append-only
// log; the dispersal network models an IPFS-style provider registry.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "atdkg/bytes.hpp"

namespace atdkg {

struct PbbEntry {
    uint64_t counter = 0;
    Bytes keyword;
    Bytes value;
};

// Append-only log with exact-match keyword retrieval. Counters start at 1 and
// increase by one per post. Implementations must sequence posts in a single
// total order so that every reader observes identical windows; a real chain
// client can sit behind this interface in place of the in-process one below.
class Pbb {
  public:
    virtual ~Pbb() = default;

    // Stores (counter, keyword, value) and returns the assigned counter.
    virtual uint64_t post(const Bytes& keyword, const Bytes& value) = 0;

    // Entries with this exact keyword whose counter lies in [t_start, t_end],
    // in counter order. Requires t_start <= t_end.
    virtual std::vector<PbbEntry> retrieve(uint64_t t_start, uint64_t t_end,
                                           const Bytes& keyword) const = 0;

    // Counter of the most recent post, 0 before the first.
    virtual uint64_t get_counter() const = 0;
};

class InProcessPbb final : public Pbb {
  public:
    uint64_t post(const Bytes& keyword, const Bytes& value) override;
    std::vector<PbbEntry> retrieve(uint64_t t_start, uint64_t t_end,
                                   const Bytes& keyword) const override;
    uint64_t get_counter() const override;

    // Total keyword plus value bytes across all posts, for storage accounting.
    uint64_t bytes_posted() const { return bytes_posted_; }

  private:
    std::vector<PbbEntry> log_;
    uint64_t bytes_posted_ = 0;
};

// Provider registry plus block store, addressed by SHA-256 of the block.
// Registration demands the block bytes so that only a holder can register;
// retrieval asks the caller which provider nodes are currently reachable,
// since reachability is decided by the surrounding harness, not the network.
class Ddn {
  public:
    // Adds node `nid` as a provider for `bid`. Throws std::invalid_argument
    // unless sha256(block) == bid.
    void register_provider(uint32_t nid, const Bytes& bid, const Bytes& block);

    // The block for `bid` when at least one registered provider satisfies
    // `available`; empty otherwise, including for ids never registered.
    std::optional<Bytes> retrieve(
        const Bytes& bid, const std::function<bool(uint32_t)>& available) const;

    // Provider set for `bid`, or nullptr if never registered.
    const std::set<uint32_t>* providers(const Bytes& bid) const;

    // Total block bytes handed out by successful retrievals.
    uint64_t bytes_served() const { return bytes_served_; }

  private:
    std::map<Bytes, std::set<uint32_t>> registry_;
    std::map<Bytes, Bytes> blocks_;
    mutable uint64_t bytes_served_ = 0;
};

}  // namespace atdkg
