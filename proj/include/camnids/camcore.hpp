#ifndef CAMNIDS_CAMCORE_HPP
#define CAMNIDS_CAMCORE_HPP

#include <cstdint>
#include <vector>

#include "camnids/fixed1s.hpp"

namespace camnids {

enum class Port { A, B };

/// Activity counters for one array operation. Rows outside the enabled
/// range are power gated and contribute no search activity.
struct Activity {
    std::uint64_t enabled_rows = 0;
    std::uint64_t searched_bits = 0;
    std::uint64_t l1_segments = 0;  // 8-row look-ahead segments touched
    std::uint64_t sram_bits_read = 0;
};

struct EnableRange {
    int dn = 0;
    int up = 0;
};

/// Inclusive-interval enable mask plus decoder activity.
std::pair<std::vector<bool>, Activity> decode_range(const EnableRange& r,
                                                    int row_count);

std::uint64_t l1_segments_of(const EnableRange& r);

/// Functional CAM array: slot_count 1 for Phase-1 PEs, W for Phase-2 banks.
class CamArray {
public:
    CamArray(int capacity, int slot_count);

    void store(int row, const WideRow& word);  // throws on bad row/word
    int capacity() const { return capacity_; }
    int slot_count() const { return slot_count_; }
    const WideRow& row(int i) const { return rows_[i]; }

    /// Searches the enabled rows for the window (size slot_count). Port B is
    /// only defined for single-slot arrays. Returns matched row indices in
    /// ascending order.
    std::pair<std::vector<int>, Activity> search(const EnableRange& range,
                                                 const std::vector<Code11>& window,
                                                 Port port) const;

private:
    int capacity_;
    int slot_count_;
    std::vector<WideRow> rows_;
};

/// Fixed-width SRAM payload store with read accounting.
template <typename T>
class SramArray {
public:
    SramArray(int capacity, int payload_bits)
        : payload_bits_(payload_bits), slots_(capacity), written_(capacity, false) {}

    void store(int row, T value) {
        check(row);
        slots_[row] = std::move(value);
        written_[row] = true;
    }

    const T& read(int row, Activity& act) const {
        check(row);
        if (!written_[row]) fail(ErrorKind::Data, "sram read of unwritten row");
        act.sram_bits_read += payload_bits_;
        return slots_[row];
    }

    int payload_bits() const { return payload_bits_; }

private:
    void check(int row) const {
        if (row < 0 || row >= static_cast<int>(slots_.size()))
            fail(ErrorKind::Data, "sram row out of bounds");
    }

    int payload_bits_;
    std::vector<T> slots_;
    std::vector<bool> written_;
};

}  // namespace camnids

#endif
