#include "camnids/fixed1s.hpp"

#include <bit>
#include <cstdio>

namespace camnids {

int popcount11(Code11 w) { return std::popcount(static_cast<unsigned>(w & kCode11Mask)); }

bool is_char_code(Code11 w) { return popcount11(w) == kCode11Ones; }

Codebook Codebook::canonical() {
    Codebook book;
    int next = 0;
    for (Code11 w = 0; w <= kCode11Mask && next < 256; ++w) {
        if (is_char_code(w)) book.to_code_[next++] = w;
    }
    return book;
}

Codebook Codebook::from_table(const std::array<Code11, 256>& table) {
    std::array<bool, kCode11Mask + 1> seen{};
    for (int b = 0; b < 256; ++b) {
        Code11 w = table[b];
        if (!is_char_code(w))
            fail(ErrorKind::Data, "codebook entry " + std::to_string(b) +
                                      " does not have five 1-bits");
        if (seen[w])
            fail(ErrorKind::Data, "codebook entry " + std::to_string(b) +
                                      " duplicates another code");
        seen[w] = true;
    }
    Codebook book;
    book.to_code_ = table;
    return book;
}

int Codebook::byte_of(Code11 w) const {
    for (int b = 0; b < 256; ++b)
        if (to_code_[b] == w) return b;
    return -1;
}

std::string Codebook::to_csv() const {
    std::string out = "byte,code_hex\n";
    char buf[32];
    for (int b = 0; b < 256; ++b) {
        std::snprintf(buf, sizeof buf, "%d,0x%03X\n", b, to_code_[b]);
        out += buf;
    }
    return out;
}

WideRow encode_suffix(const std::vector<WildByte>& bytes, int w,
                      const Codebook& book) {
    if (static_cast<int>(bytes.size()) > w)
        fail(ErrorKind::Capacity,
             "suffix of " + std::to_string(bytes.size()) +
                 " bytes exceeds the " + std::to_string(w) + "-slot row");
    WideRow row;
    row.slots.assign(w, kWildcardCode);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        if (!bytes[i].any) row.slots[i] = book.code(bytes[i].value);
    return row;
}

bool match_wide(const WideRow& row, const std::vector<Code11>& window) {
    if (window.size() != row.slots.size())
        fail(ErrorKind::Invalid, "search window width does not match the row");
    for (std::size_t i = 0; i < row.slots.size(); ++i)
        if (!match_port_a(row.slots[i], window[i])) return false;
    return true;
}

}  // namespace camnids
