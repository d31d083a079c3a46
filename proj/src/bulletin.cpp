#include "atdkg/bulletin.hpp"

#include <stdexcept>

#include "atdkg/hash.hpp"

namespace atdkg {

uint64_t InProcessPbb::post(const Bytes& keyword, const Bytes& value) {
    PbbEntry entry;
    entry.counter = static_cast<uint64_t>(log_.size()) + 1;
    entry.keyword = keyword;
    entry.value = value;
    bytes_posted_ += keyword.size() + value.size();
    log_.push_back(std::move(entry));
    return log_.back().counter;
}

std::vector<PbbEntry> InProcessPbb::retrieve(uint64_t t_start, uint64_t t_end,
                                             const Bytes& keyword) const {
    if (t_start > t_end) {
        throw std::invalid_argument("pbb: retrieval window start exceeds end");
    }
    std::vector<PbbEntry> out;
    for (const PbbEntry& entry : log_) {
        if (entry.counter < t_start) continue;
        if (entry.counter > t_end) break;
        if (entry.keyword == keyword) out.push_back(entry);
    }
    return out;
}

uint64_t InProcessPbb::get_counter() const {
    return static_cast<uint64_t>(log_.size());
}

void Ddn::register_provider(uint32_t nid, const Bytes& bid, const Bytes& block) {
    if (digest_bytes(sha256(block)) != bid) {
        throw std::invalid_argument("ddn: block does not hash to the given id");
    }
    blocks_[bid] = block;
    registry_[bid].insert(nid);
}

std::optional<Bytes> Ddn::retrieve(
    const Bytes& bid, const std::function<bool(uint32_t)>& available) const {
    auto reg = registry_.find(bid);
    if (reg == registry_.end()) return std::nullopt;
    for (uint32_t nid : reg->second) {
        if (available(nid)) {
            const Bytes& block = blocks_.at(bid);
            bytes_served_ += block.size();
            return block;
        }
    }
    return std::nullopt;
}

const std::set<uint32_t>* Ddn::providers(const Bytes& bid) const {
    auto it = registry_.find(bid);
    return it == registry_.end() ? nullptr : &it->second;
}

}  // namespace atdkg
