#ifndef CAMNIDS_FIXED1S_HPP
#define CAMNIDS_FIXED1S_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "camnids/rulespec.hpp"

namespace camnids {

/// An 11-bit CAM word. Bit 0 is cell 0 (least significant). A character
/// code has exactly five 1-bits; the all-zero word is the wildcard /
/// stored-only value and the pad code driven past end-of-stream.
using Code11 = std::uint16_t;

inline constexpr Code11 kCode11Mask = 0x7FF;
inline constexpr int kCode11Bits = 11;
inline constexpr int kCode11Ones = 5;
inline constexpr Code11 kWildcardCode = 0;

int popcount11(Code11 w);
bool is_char_code(Code11 w);

/// Canonical byte -> fixed-1s mapping: the 462 popcount-5 values of 11 bits
/// are enumerated in ascending numeric order and byte b gets the b-th one.
class Codebook {
public:
    static Codebook canonical();

    Code11 code(std::uint8_t b) const { return to_code_[b]; }
    /// Reverse lookup; -1 if the word is not a character code of this book.
    int byte_of(Code11 w) const;

    /// CSV dump: header "byte,code_hex", 256 rows in ascending byte order,
    /// codes as 3-digit hex like 0x01F.
    std::string to_csv() const;

    bool operator==(const Codebook&) const = default;

    const std::array<Code11, 256>& table() const { return to_code_; }
    /// Validates popcount and injectivity; throws Error on violation.
    static Codebook from_table(const std::array<Code11, 256>& table);

private:
    Codebook() = default;
    std::array<Code11, 256> to_code_{};
};

/// Port A: search lines carry the true code. A stored 1 facing a search 0
/// discharges the match line, so the row matches iff no such pair exists.
inline bool match_port_a(Code11 stored, Code11 search) {
    return (stored & ~search & kCode11Mask) == 0;
}

/// Port B: search lines carry the complement of the code, so the roles of
/// stored and search swap. Stored all-zero (wildcard) matches nothing here.
inline bool match_port_b(Code11 stored, Code11 search) {
    return (search & ~stored & kCode11Mask) == 0;
}

/// One Phase-2 row: W slots of Code11 (default W = 20, i.e. 220 bits).
struct WideRow {
    std::vector<Code11> slots;

    bool operator==(const WideRow&) const = default;
};

/// Encodes a suffix into a wide row: literals get their code, wildcards the
/// all-zero word, and slots past the suffix are zero-padded so they match
/// any trailing stream bytes. Throws if the suffix does not fit.
WideRow encode_suffix(const std::vector<WildByte>& bytes, int w,
                      const Codebook& book);

/// Slot-wise port-A match of a stored wide row against a search window.
bool match_wide(const WideRow& row, const std::vector<Code11>& window);

}  // namespace camnids

#endif
