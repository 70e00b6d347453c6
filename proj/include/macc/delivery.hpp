#pragma once

// Coded delivery over synthetic file bits. Every code s of Q becomes one
// multicast block, the XOR of the requested packets at the cells carrying s;
// each user decodes from its accessible cache content and the blocks.

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coloring.hpp"
#include "macc_model.hpp"
#include "pda.hpp"
#include "random.hpp"

namespace macc {

using Block = std::vector<std::uint64_t>;

inline void xor_into(Block& dst, const Block& src) {
    if (dst.size() != src.size()) throw std::invalid_argument("xor_into: block size mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

/// 0-based requested file per user.
struct DemandVector {
    std::vector<int> files;

    int users() const { return static_cast<int>(files.size()); }
    void validate(int library_files) const {
        for (int n : files)
            if (n < 0 || n >= library_files) throw std::invalid_argument("DemandVector: file index out of range");
    }
};

inline DemandVector random_demands(int users, int files, Rng& rng) {
    DemandVector d;
    for (int k = 0; k < users; ++k) d.files.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(files))));
    return d;
}

/// N files x F packets of B bits each, filled from the seeded generator.
class FileLibrary {
public:
    static constexpr int kDefaultPacketBits = 64;

    FileLibrary(int files, int packets, int packet_bits, std::uint64_t seed)
        : files_(files), packets_(packets), bits_(packet_bits), words_((packet_bits + 63) / 64) {
        if (files <= 0 || packets <= 0 || packet_bits <= 0)
            throw std::invalid_argument("FileLibrary: N, F and B must be positive");
        Rng rng(seed);
        data_.resize(static_cast<std::size_t>(files) * packets * words_);
        const int tail = packet_bits % 64;
        const std::uint64_t tail_mask = tail ? (std::uint64_t{1} << tail) - 1 : ~std::uint64_t{0};
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] = rng.next();
            if (i % words_ == static_cast<std::size_t>(words_ - 1)) data_[i] &= tail_mask;
        }
    }

    /// Zero-filled library; used to build libraries by combination.
    static FileLibrary zeros(int files, int packets, int packet_bits) {
        FileLibrary lib(files, packets, packet_bits, 0);
        std::fill(lib.data_.begin(), lib.data_.end(), 0);
        return lib;
    }

    int files() const { return files_; }
    int packets() const { return packets_; }
    int packet_bits() const { return bits_; }

    Block packet(int file, int f) const {
        const auto* p = data_.data() + offset(file, f);
        return Block(p, p + words_);
    }

    FileLibrary& operator^=(const FileLibrary& other) {
        if (other.files_ != files_ || other.packets_ != packets_ || other.bits_ != bits_)
            throw std::invalid_argument("FileLibrary: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] ^= other.data_[i];
        return *this;
    }

private:
    std::size_t offset(int file, int f) const {
        if (file < 0 || file >= files_ || f < 0 || f >= packets_) throw std::out_of_range("FileLibrary: bad packet");
        return (static_cast<std::size_t>(file) * packets_ + f) * words_;
    }

    int files_;
    int packets_;
    int bits_;
    int words_;
    std::vector<std::uint64_t> data_;
};

struct Transmission {
    int code = 0;
    std::vector<CellRef> cells;
    Block payload;
};

struct TransmissionSchedule {
    std::vector<Transmission> blocks;  // blocks[s - 1] carries code s

    std::size_t size() const { return blocks.size(); }
    friend bool operator==(const TransmissionSchedule& a, const TransmissionSchedule& b) {
        if (a.blocks.size() != b.blocks.size()) return false;
        for (std::size_t i = 0; i < a.blocks.size(); ++i)
            if (a.blocks[i].code != b.blocks[i].code || !(a.blocks[i].cells == b.blocks[i].cells) ||
                a.blocks[i].payload != b.blocks[i].payload)
                return false;
        return true;
    }
};

inline TransmissionSchedule make_schedule(const PdaArray& q, const DemandVector& d, const FileLibrary& lib) {
    if (q.rows() != lib.packets()) throw std::invalid_argument("make_schedule: Q has " + std::to_string(q.rows()) +
                                                               " rows, library has F = " + std::to_string(lib.packets()));
    if (q.cols() != d.users()) throw std::invalid_argument("make_schedule: demand length differs from Q's columns");
    d.validate(lib.files());

    const int words = (lib.packet_bits() + 63) / 64;
    TransmissionSchedule schedule;
    const int s_max = q.max_code();
    schedule.blocks.resize(s_max);
    for (int s = 1; s <= s_max; ++s) {
        schedule.blocks[s - 1].code = s;
        schedule.blocks[s - 1].payload.assign(words, 0);
    }
    for (int f = 0; f < q.rows(); ++f)
        for (int k = 0; k < q.cols(); ++k) {
            const Cell c = q.at(f, k);
            if (c.is_star()) continue;
            auto& tx = schedule.blocks[c.code() - 1];
            tx.cells.push_back({f, k});
            xor_into(tx.payload, lib.packet(d.files[k], f));
        }
    return schedule;
}

/// The packets user k can read: those stored at some node it accesses.
class UserCache {
public:
    UserCache(const StarGrid& u, const FileLibrary& lib, int user) : u_(u), lib_(lib), user_(user) {}

    bool holds(int f) const { return u_.is_star(f, user_); }
    std::optional<Block> read(int file, int f) const {
        if (!holds(f)) return std::nullopt;
        return lib_.packet(file, f);
    }

private:
    const StarGrid& u_;
    const FileLibrary& lib_;
    int user_;
};

struct DecodeFailure {
    int user = 0;
    int packet = 0;
    std::string reason;
};

struct DecodeReport {
    bool ok = true;
    std::vector<bool> user_ok;
    std::optional<DecodeFailure> first_failure;
};

inline DecodeReport decode_all(const TransmissionSchedule& schedule, const StarGrid& u, const PdaArray& q,
                               const DemandVector& d, const FileLibrary& lib) {
    if (u.rows() != q.rows() || u.cols() != q.cols()) throw std::invalid_argument("decode_all: U and Q shapes differ");
    DecodeReport report;
    report.user_ok.assign(u.cols(), true);
    auto fail = [&](int k, int f, std::string why) {
        report.ok = false;
        report.user_ok[k] = false;
        if (!report.first_failure) report.first_failure = DecodeFailure{k, f, std::move(why)};
    };

    for (int k = 0; k < u.cols(); ++k) {
        const UserCache cache(u, lib, k);
        for (int f = 0; f < u.rows() && report.user_ok[k]; ++f) {
            std::optional<Block> recovered;
            if (cache.holds(f)) {
                recovered = cache.read(d.files[k], f);
            } else {
                const Cell c = q.at(f, k);
                if (c.is_star() || c.code() > static_cast<int>(schedule.size())) {
                    fail(k, f, "packet neither cached nor scheduled");
                    continue;
                }
                const Transmission& tx = schedule.blocks[c.code() - 1];
                Block acc = tx.payload;
                bool side_info = true;
                for (const CellRef& other : tx.cells) {
                    if (other == CellRef{f, k}) continue;
                    auto known = cache.read(d.files[other.k], other.f);
                    if (!known) {
                        side_info = false;
                        break;
                    }
                    xor_into(acc, *known);
                }
                if (!side_info) {
                    fail(k, f, "missing side information for block " + std::to_string(c.code()));
                    continue;
                }
                recovered = std::move(acc);
            }
            if (*recovered != lib.packet(d.files[k], f)) fail(k, f, "recovered packet differs from the library");
        }
    }
    return report;
}

/// R = S / F, exact.
inline Rational load(std::int64_t colors, std::int64_t packets) {
    if (packets <= 0) throw std::invalid_argument("load: F must be positive");
    if (colors < 0) throw std::invalid_argument("load: S must be nonnegative");
    return Rational(colors, packets);
}

inline Rational load(const PdaArray& q) { return load(q.max_code(), q.rows()); }

inline Rational load(const VertexColoring& c, std::int64_t packets) { return load(c.used_colors(), packets); }

inline std::string format_rational(const Rational& r) {
    std::ostringstream os;
    os << r.numerator() << '/' << r.denominator();
    return os.str();
}

}  // namespace macc
