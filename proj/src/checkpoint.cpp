#include "urllc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "urllc/random.hpp"

namespace urllc::dqn {

namespace {

constexpr char kMagic[8] = {'U', 'R', 'L', 'L', 'C', 'Q', 'N', '\0'};

class Writer {
public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(const char* p, std::size_t n) { bytes_.append(p, n); }
    const std::string& bytes() const { return bytes_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string bytes_;
};

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string_view raw(std::size_t n) {
        need(n);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint truncated");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

// Guards allocation sizes read from untrusted files.
constexpr std::uint32_t kMaxCount = 1u << 20;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const QNetwork& net = ckpt.network;
    if (ckpt.transform.size() != static_cast<std::size_t>(net.input_dim()) ||
        ckpt.transform.scale.size() != ckpt.transform.offset.size())
        throw CheckpointError("save_checkpoint: normalization size does not match network input");

    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(net.dims().size()));
    for (int d : net.dims()) w.u32(static_cast<std::uint32_t>(d));
    w.u32(ckpt.actions.num_aps);
    w.u32(ckpt.actions.num_subbands);
    w.u32(ckpt.actions.max_aps);
    w.u32(static_cast<std::uint32_t>(ckpt.actions.power_levels_dbm.size()));
    for (double p : ckpt.actions.power_levels_dbm) w.f64(p);
    w.u32(static_cast<std::uint32_t>(ckpt.transform.size()));
    for (double v : ckpt.transform.offset) w.f64(v);
    for (double v : ckpt.transform.scale) w.f64(v);
    w.u64(ckpt.training_episodes);
    w.u64(ckpt.config_hash);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Eigen::MatrixXd& wm = net.weights()[l];
        for (Eigen::Index r = 0; r < wm.rows(); ++r) {
            for (Eigen::Index c = 0; c < wm.cols(); ++c) w.f64(wm(r, c));
        }
        for (Eigen::Index r = 0; r < net.biases()[l].size(); ++r) w.f64(net.biases()[l](r));
    }
    const std::uint64_t checksum = fnv1a64(w.bytes());
    w.u64(checksum);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<std::vector<int>>& expected_dims) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = " (" + path.string() + ")";

    if (bytes.size() < sizeof kMagic + 12) throw CheckpointError("checkpoint truncated" + where);
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError("bad checkpoint magic" + where);
    {
        Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
        if (tail.u64() != fnv1a64(std::string_view(bytes).substr(0, bytes.size() - 8)))
            throw CheckpointError("checkpoint checksum mismatch" + where);
    }

    Reader r(std::string_view(bytes).substr(0, bytes.size() - 8));
    r.raw(sizeof kMagic);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + where);

    const std::uint32_t n_dims = r.u32();
    if (n_dims < 2 || n_dims > 64) throw CheckpointError("invalid layer count" + where);
    std::vector<int> dims(n_dims);
    for (int& d : dims) {
        const std::uint32_t v = r.u32();
        if (v == 0 || v > kMaxCount) throw CheckpointError("invalid layer size" + where);
        d = static_cast<int>(v);
    }
    if (expected_dims && *expected_dims != dims) throw CheckpointError("checkpoint layer dims mismatch" + where);

    Checkpoint ck;
    ck.actions.num_aps = r.u32();
    ck.actions.num_subbands = r.u32();
    ck.actions.max_aps = r.u32();
    const std::uint32_t n_power = r.u32();
    if (n_power > kMaxCount) throw CheckpointError("invalid power level count" + where);
    ck.actions.power_levels_dbm.resize(n_power);
    for (double& p : ck.actions.power_levels_dbm) p = r.f64();

    const std::uint32_t n_feat = r.u32();
    if (n_feat != static_cast<std::uint32_t>(dims.front()))
        throw CheckpointError("normalization size does not match input dimension" + where);
    ck.transform.offset.resize(n_feat);
    ck.transform.scale.resize(n_feat);
    for (double& v : ck.transform.offset) v = r.f64();
    for (double& v : ck.transform.scale) v = r.f64();
    ck.training_episodes = r.u64();
    ck.config_hash = r.u64();

    ck.network = QNetwork(dims);
    for (std::size_t l = 0; l < ck.network.num_layers(); ++l) {
        Eigen::MatrixXd& wm = ck.network.weights()[l];
        for (Eigen::Index row = 0; row < wm.rows(); ++row) {
            for (Eigen::Index c = 0; c < wm.cols(); ++c) wm(row, c) = r.f64();
        }
        for (Eigen::Index row = 0; row < ck.network.biases()[l].size(); ++row) ck.network.biases()[l](row) = r.f64();
    }
    if (r.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint" + where);
    return ck;
}

}  // namespace urllc::dqn
