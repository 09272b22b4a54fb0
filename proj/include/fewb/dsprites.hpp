#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "fewb/rng.hpp"

namespace fewb::env {

enum class Shape : int { Square = 0, Ellipse = 1, Heart = 2 };
enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kNumActions = 4;
inline constexpr int kReferenceResolution = 64;
inline constexpr int kMoveStep = 8;  // one selected action is applied eight times
inline constexpr int kBottomLine = 32;

struct EnvConfig {
    int resolution = 16;   // rendered image side, one of 8/16/32/64
    int frame_stack = 3;   // frames per observation
    int max_cycles = 50;   // episode cut-off, reward -1 on timeout
};

struct EnvState {
    Shape shape = Shape::Square;
    int x = 0;  // top-left of the shape box on the 64x64 reference grid
    int y = 0;
    int cycle_count = 0;
    std::uint64_t rng_seed = 0;  // draw that produced this episode
};

/// Stack of the most recent frame_stack binary frames, oldest first,
/// flattened row-major per frame.
struct Observation {
    int resolution = 0;
    int frame_stack = 0;
    std::vector<real> data;
    std::size_t size() const { return data.size(); }
};

struct StepResult {
    Observation observation;
    real reward = 0;
    bool done = false;
};

/// Desk-scale dSprites: one shape per episode, four move actions displacing
/// the shape by eight reference pixels, episode ends on crossing the bottom
/// line (y >= 32) or after max_cycles moves. Squares are rewarded towards the
/// bottom-left corner, ellipses and hearts towards the bottom-right.
class DspritesEnv {
public:
    explicit DspritesEnv(EnvConfig cfg);

    Observation reset(Rng& rng);
    StepResult step(Action action);

    const EnvState& state() const { return state_; }
    const EnvConfig& config() const { return cfg_; }
    bool done() const { return done_; }
    Observation observation() const;

    /// Terminal reward, clipped to [-1, 1]: crossing pays out linearly in the
    /// distance to the preferred corner and is zero at the center column;
    /// running out of cycles pays -1; everything else pays 0.
    static real compute_reward(const EnvState& s, bool crossed, int max_cycles);

    /// Deterministic rasterization at resolution 8/16/32 or 64. A rendered
    /// pixel is set iff its block on the reference grid touches the shape.
    static std::vector<std::uint8_t> render(const EnvState& s, int resolution);

private:
    EnvConfig cfg_;
    EnvState state_;
    bool done_ = true;
    std::deque<std::vector<std::uint8_t>> frames_;

    void push_frame();
};

}  // namespace fewb::env
