#include "camnids/camcore.hpp"

namespace camnids {

std::uint64_t l1_segments_of(const EnableRange& r) {
    // Level-1 look-ahead works on 8-row segments; the decode touches every
    // segment overlapping the range.
    return static_cast<std::uint64_t>(r.up / 8 - r.dn / 8 + 1);
}

std::pair<std::vector<bool>, Activity> decode_range(const EnableRange& r,
                                                    int row_count) {
    if (r.dn < 0 || r.up < r.dn || r.up >= row_count)
        fail(ErrorKind::Invalid, "decode_range: bad range [" + std::to_string(r.dn) +
                                     "," + std::to_string(r.up) + "] for " +
                                     std::to_string(row_count) + " rows");
    std::vector<bool> mask(static_cast<std::size_t>(row_count), false);
    for (int i = r.dn; i <= r.up; ++i) mask[static_cast<std::size_t>(i)] = true;
    Activity act;
    act.enabled_rows = static_cast<std::uint64_t>(r.up - r.dn + 1);
    act.l1_segments = l1_segments_of(r);
    return {std::move(mask), act};
}

CamArray::CamArray(int capacity, int slot_count)
    : capacity_(capacity), slot_count_(slot_count) {
    if (capacity < 1 || slot_count < 1)
        fail(ErrorKind::Invalid, "cam array: bad dimensions");
    rows_.assign(static_cast<std::size_t>(capacity),
                 WideRow{std::vector<Code11>(static_cast<std::size_t>(slot_count),
                                             kWildcardCode)});
}

void CamArray::store(int row, const WideRow& word) {
    if (row < 0 || row >= capacity_)
        fail(ErrorKind::Invalid, "cam store: row out of bounds");
    if (static_cast<int>(word.slots.size()) != slot_count_)
        fail(ErrorKind::Invalid, "cam store: word width mismatch");
    for (Code11 c : word.slots)
        if (c != kWildcardCode && !is_char_code(c))
            fail(ErrorKind::Data, "cam store: stored word violates fixed-1s coding");
    rows_[static_cast<std::size_t>(row)] = word;
}

std::pair<std::vector<int>, Activity> CamArray::search(
    const EnableRange& range, const std::vector<Code11>& window, Port port) const {
    if (port == Port::B && slot_count_ != 1)
        fail(ErrorKind::Invalid,
             "cam search: port B is only available on single-slot arrays");
    if (static_cast<int>(window.size()) != slot_count_)
        fail(ErrorKind::Invalid, "cam search: window width mismatch");
    auto [mask, act] = decode_range(range, capacity_);
    act.searched_bits = act.enabled_rows * static_cast<std::uint64_t>(slot_count_) *
                        kCode11Bits;

    std::vector<int> matched;
    for (int i = range.dn; i <= range.up; ++i) {
        const WideRow& stored = rows_[static_cast<std::size_t>(i)];
        bool hit = true;
        for (int s = 0; s < slot_count_ && hit; ++s) {
            Code11 st = stored.slots[static_cast<std::size_t>(s)];
            Code11 se = window[static_cast<std::size_t>(s)];
            hit = port == Port::A ? match_port_a(st, se) : match_port_b(st, se);
        }
        if (hit) matched.push_back(i);
    }
    return {std::move(matched), act};
}

}  // namespace camnids
