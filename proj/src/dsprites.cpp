#include "fewb/dsprites.hpp"

#include <algorithm>

namespace fewb::env {

namespace {

// Shape masks on a 4x4 unit grid; each unit covers 4x4 reference pixels, so
// a shape occupies a 16x16 box. Unit granularity keeps every supported
// resolution an exact block reduction of the reference render.
constexpr std::uint16_t kSquareMask = 0b1111'1111'1111'1111;
constexpr std::uint16_t kEllipseMask = 0b0110'1111'1111'0110;  // diamond-ish disc
constexpr std::uint16_t kHeartMask = 0b1001'1111'0110'0110;    // two lobes, tapering

std::uint16_t mask_for(Shape s) {
    switch (s) {
        case Shape::Square: return kSquareMask;
        case Shape::Ellipse: return kEllipseMask;
        case Shape::Heart: return kHeartMask;
    }
    return 0;
}

bool reference_pixel_set(const EnvState& s, int px, int py) {
    const int dx = px - s.x;
    const int dy = py - s.y;
    if (dx < 0 || dx >= 16 || dy < 0 || dy >= 16) return false;
    const int unit = (dy / 4) * 4 + (dx / 4);
    return (mask_for(s.shape) >> (15 - unit)) & 1;
}

constexpr int kMaxCoord = kReferenceResolution - 16;  // keep draw box on canvas

}  // namespace

DspritesEnv::DspritesEnv(EnvConfig cfg) : cfg_(cfg) {
    if (cfg_.resolution != 8 && cfg_.resolution != 16 && cfg_.resolution != 32 &&
        cfg_.resolution != 64)
        throw ConfigError("dsprites: unsupported resolution " + std::to_string(cfg_.resolution));
    if (cfg_.frame_stack < 1) throw ConfigError("dsprites: frame_stack must be >= 1");
    if (cfg_.max_cycles < 1) throw ConfigError("dsprites: max_cycles must be >= 1");
}

std::vector<std::uint8_t> DspritesEnv::render(const EnvState& s, int resolution) {
    if (resolution != 8 && resolution != 16 && resolution != 32 && resolution != 64)
        throw ConfigError("dsprites: unsupported resolution " + std::to_string(resolution));
    const int f = kReferenceResolution / resolution;
    std::vector<std::uint8_t> img(static_cast<std::size_t>(resolution) * resolution, 0);
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            bool set = false;
            for (int dy = 0; dy < f && !set; ++dy)
                for (int dx = 0; dx < f && !set; ++dx)
                    set = reference_pixel_set(s, j * f + dx, i * f + dy);
            img[static_cast<std::size_t>(i) * resolution + j] = set ? 1 : 0;
        }
    }
    return img;
}

real DspritesEnv::compute_reward(const EnvState& s, bool crossed, int max_cycles) {
    if (crossed) {
        const real x = static_cast<real>(s.x);
        real r = (s.shape == Shape::Square) ? (real(15.5) - x) / real(16)
                                            : (x - real(15.5)) / real(16);
        return std::clamp(r, real(-1), real(1));
    }
    if (s.cycle_count >= max_cycles) return real(-1);
    return real(0);
}

void DspritesEnv::push_frame() {
    frames_.push_back(render(state_, cfg_.resolution));
    while (static_cast<int>(frames_.size()) > cfg_.frame_stack) frames_.pop_front();
}

Observation DspritesEnv::observation() const {
    Observation obs;
    obs.resolution = cfg_.resolution;
    obs.frame_stack = cfg_.frame_stack;
    obs.data.reserve(frames_.size() * frames_.front().size());
    for (const auto& frame : frames_)
        for (auto px : frame) obs.data.push_back(static_cast<real>(px));
    return obs;
}

Observation DspritesEnv::reset(Rng& rng) {
    state_.rng_seed = rng.next_u64();
    Rng episode_rng(state_.rng_seed);
    state_.shape = static_cast<Shape>(episode_rng.uniform_int(3));
    // Positions live on the 8-pixel move lattice; initial y stays above the
    // bottom line so every episode needs at least one DOWN to finish.
    const int x_slots = kMaxCoord / kMoveStep + 1;
    state_.x = static_cast<int>(episode_rng.uniform_int(x_slots)) * kMoveStep;
    state_.y = static_cast<int>(episode_rng.uniform_int(kBottomLine / kMoveStep)) * kMoveStep;
    state_.cycle_count = 0;
    done_ = false;
    frames_.clear();
    for (int i = 0; i < cfg_.frame_stack; ++i) push_frame();
    return observation();
}

StepResult DspritesEnv::step(Action action) {
    if (done_) throw ContractError("dsprites: step() on a finished episode");
    switch (action) {
        case Action::Up: state_.y = std::max(0, state_.y - kMoveStep); break;
        case Action::Down: state_.y += kMoveStep; break;
        case Action::Left: state_.x = std::max(0, state_.x - kMoveStep); break;
        case Action::Right: state_.x = std::min(kMaxCoord, state_.x + kMoveStep); break;
    }
    state_.cycle_count += 1;
    const bool crossed = state_.y >= kBottomLine;
    done_ = crossed || state_.cycle_count >= cfg_.max_cycles;
    push_frame();
    StepResult result;
    result.reward = compute_reward(state_, crossed, cfg_.max_cycles);
    result.done = done_;
    result.observation = observation();
    return result;
}

}  // namespace fewb::env
