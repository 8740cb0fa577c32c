#include "shapesense/trace_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace shapesense {

namespace {

enum class Token { Drop, Empty, Zero, Pos };

struct LineFit {
    // Least squares of r over t, accumulated incrementally.
    double n = 0, st = 0, sr = 0, stt = 0, str = 0;
    void add(double t, double r) {
        n += 1;
        st += t;
        sr += r;
        stt += t * t;
        str += t * r;
    }
    double slope() const {
        const double det = n * stt - st * st;
        if (det <= 0.0 || n < 2) return 0.0;
        return (n * str - st * sr) / det;
    }
    double intercept() const {
        if (n < 1) return 0.0;
        return (sr - slope() * st) / n;
    }
    double predict(double t) const { return intercept() + slope() * t; }
};

LineFit fit_parts(const DistanceTrace& trace,
                  const std::vector<std::pair<int, int>>& parts) {
    LineFit fit;
    for (auto [a, b] : parts)
        for (int i = a; i <= b; ++i) fit.add(trace.samples[i].t, *trace.samples[i].reading);
    return fit;
}

void refresh_fit(Segment& seg, const DistanceTrace& trace) {
    const LineFit fit = fit_parts(trace, seg.parts);
    seg.slope = fit.slope();
    seg.intercept = fit.intercept();
    seg.t_s = trace.samples[seg.parts.front().first].t;
    seg.t_e = trace.samples[seg.parts.back().second].t;
    seg.n_reports = 0;
    for (auto [a, b] : seg.parts) seg.n_reports += b - a + 1;
}

double residual(const Segment& seg, const DistanceTrace& trace, int i) {
    return std::abs(*trace.samples[i].reading - (seg.intercept + seg.slope * trace.samples[i].t));
}

// Move junction samples to the side whose fitted line they lie on. The
// greedy pass can hand the first sample after a slope change to the earlier
// segment when the true event falls just before it.
void polish_boundary(Segment& left, Segment& right, const DistanceTrace& trace) {
    for (int iter = 0; iter < 3; ++iter) {
        bool moved = false;
        if (left.n_reports > 2) {
            const int i = left.parts.back().second;
            Segment core = left;
            core.parts.back().second -= 1;
            refresh_fit(core, trace);
            Segment probe = right;
            if (residual(probe, trace, i) + 1e-12 < residual(core, trace, i)) {
                left.parts.back().second -= 1;
                right.parts.front().first -= 1;
                refresh_fit(left, trace);
                refresh_fit(right, trace);
                moved = true;
            }
        }
        if (!moved && right.n_reports > 2) {
            const int i = right.parts.front().first;
            Segment core = right;
            core.parts.front().first += 1;
            refresh_fit(core, trace);
            if (residual(left, trace, i) + 1e-12 < residual(core, trace, i)) {
                right.parts.front().first += 1;
                left.parts.back().second += 1;
                refresh_fit(left, trace);
                refresh_fit(right, trace);
                moved = true;
            }
        }
        if (!moved) break;
    }
}

}  // namespace

std::vector<Segment> segment_trace(const DistanceTrace& trace,
                                   const SegmentationParams& params) {
    const auto& samples = trace.samples;
    const int n = static_cast<int>(samples.size());
    std::vector<Token> tokens(n);
    for (int i = 0; i < n; ++i) {
        if (samples[i].dropped)
            tokens[i] = Token::Drop;
        else if (!samples[i].reading)
            tokens[i] = Token::Empty;
        else if (*samples[i].reading <= params.zero_tol)
            tokens[i] = Token::Zero;
        else
            tokens[i] = Token::Pos;
    }

    std::vector<Segment> segments;

    const auto emit_plain = [&](SegmentKind kind, int a, int b) {
        Segment seg;
        seg.kind = kind;
        seg.parts = {{a, b}};
        seg.t_s = samples[a].t;
        seg.t_e = samples[b].t;
        seg.n_reports = b - a + 1;
        segments.push_back(seg);
    };

    const auto process_run = [&](int lo, int hi) {
        // Curved stretches: three or more consecutive nonzero second
        // differences. A single slope change flags at most two.
        std::vector<char> curved(hi - lo + 1, 0);
        if (hi - lo + 1 >= 3) {
            std::vector<char> flag(hi - lo + 1, 0);
            for (int i = lo + 1; i < hi; ++i) {
                const double d2 = *samples[i - 1].reading - 2.0 * *samples[i].reading +
                                  *samples[i + 1].reading;
                flag[i - lo] = std::abs(d2) > params.curve_tol;
            }
            int run = 0;
            for (int i = 0; i <= hi - lo + 1; ++i) {
                const bool f = i <= hi - lo && flag[i];
                if (f) {
                    ++run;
                } else {
                    if (run >= 3)
                        for (int k = i - run; k < i; ++k) curved[k] = 1;
                    run = 0;
                }
            }
        }

        std::vector<Segment> local;
        int i = lo;
        while (i <= hi) {
            if (curved[i - lo]) {
                int j = i;
                while (j <= hi && curved[j - lo]) ++j;
                Segment seg;
                seg.kind = SegmentKind::Curve;
                seg.parts = {{i, j - 1}};
                refresh_fit(seg, trace);
                local.push_back(seg);
                i = j;
                continue;
            }
            // Greedy linear fit by prediction error.
            Segment seg;
            seg.kind = SegmentKind::Linear;
            LineFit fit;
            int j = i;
            for (; j <= hi && !curved[j - lo]; ++j) {
                if (fit.n >= 2) {
                    const double err = std::abs(*samples[j].reading - fit.predict(samples[j].t));
                    if (err > params.tol_slope * trace.dt) break;
                }
                fit.add(samples[j].t, *samples[j].reading);
            }
            seg.parts = {{i, j - 1}};
            refresh_fit(seg, trace);
            local.push_back(seg);
            i = j;
        }

        for (std::size_t k = 0; k + 1 < local.size(); ++k)
            if (local[k].kind == SegmentKind::Linear &&
                local[k + 1].kind == SegmentKind::Linear)
                polish_boundary(local[k], local[k + 1], trace);

        for (auto& seg : local) {
            if (seg.kind == SegmentKind::Linear && seg.n_reports < params.min_len)
                seg.kind = SegmentKind::Curve;  // junction debris, not a trusted line
        }

        // Boundary events from the flanking tokens.
        for (std::size_t k = 0; k < local.size(); ++k) {
            Segment& seg = local[k];
            const int first = seg.parts.front().first;
            const int last = seg.parts.back().second;
            if (k > 0) {
                seg.start_event = Event::SlopeChange;
            } else if (first == 0) {
                seg.start_event = Event::Truncated;
            } else {
                switch (tokens[first - 1]) {
                    case Token::Drop: seg.start_event = Event::DropoutBoundary; break;
                    case Token::Zero: seg.start_event = Event::HitZero; break;
                    case Token::Empty: {
                        const double guard = params.rmax_margin *
                                             std::max(std::abs(seg.slope) * trace.dt, 1e-9);
                        seg.start_event = *samples[first].reading >= params.r_max - guard
                                              ? Event::HitRmax
                                              : Event::FromEmpty;
                        break;
                    }
                    default: break;
                }
            }
            if (k + 1 < local.size()) {
                seg.end_event = Event::SlopeChange;
            } else if (last == n - 1) {
                seg.end_event = Event::Truncated;
            } else {
                switch (tokens[last + 1]) {
                    case Token::Drop: seg.end_event = Event::DropoutBoundary; break;
                    case Token::Zero: seg.end_event = Event::HitZero; break;
                    case Token::Empty: {
                        const double guard = params.rmax_margin *
                                             std::max(std::abs(seg.slope) * trace.dt, 1e-9);
                        seg.end_event = *samples[last].reading >= params.r_max - guard
                                            ? Event::HitRmax
                                            : Event::ToEmpty;
                        break;
                    }
                    default: break;
                }
            }
        }
        segments.insert(segments.end(), local.begin(), local.end());
    };

    int i = 0;
    while (i < n) {
        const Token tok = tokens[i];
        int j = i;
        while (j < n && tokens[j] == tok) ++j;
        if (tok == Token::Zero)
            emit_plain(SegmentKind::Zero, i, j - 1);
        else if (tok == Token::Drop)
            emit_plain(SegmentKind::Gap, i, j - 1);
        else if (tok == Token::Pos)
            process_run(i, j - 1);
        i = j;
    }

    if (!params.merge_gap_segments) return segments;

    // Collinear linear segments split only by dropout gaps are one edge
    // observation; merging recovers the long duration.
    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        for (std::size_t k = 0; k + 2 < segments.size(); ++k) {
            Segment& a = segments[k];
            Segment& gap = segments[k + 1];
            Segment& b = segments[k + 2];
            if (a.kind != SegmentKind::Linear || gap.kind != SegmentKind::Gap ||
                b.kind != SegmentKind::Linear)
                continue;
            if (std::abs(a.slope - b.slope) > params.tol_slope) continue;
            double max_res = 0.0;
            for (auto [p, q] : b.parts)
                for (int s = p; s <= q; ++s)
                    max_res = std::max(max_res, residual(a, trace, s));
            if (max_res > 2.0 * params.tol_slope * trace.dt) continue;

            Segment merged = a;
            merged.parts.insert(merged.parts.end(), b.parts.begin(), b.parts.end());
            merged.end_event = b.end_event;
            merged.merged = true;
            refresh_fit(merged, trace);
            segments[k] = merged;
            segments.erase(segments.begin() + k + 1, segments.begin() + k + 3);
            merged_any = true;
            break;
        }
    }
    return segments;
}

void apply_slope_noise(std::vector<Segment>& segments, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (Segment& seg : segments)
        if (seg.kind == SegmentKind::Linear)
            seg.slope = std::tan(std::atan(seg.slope) + rng.normal(0.0, sigma));
}

void extract_samples(const std::vector<Segment>& segments, const DistanceTrace& trace,
                     const SegmentationParams& params, SampleSet& out) {
    const auto qualifies = [](Event start, Event end) {
        const bool s_ok = start == Event::SlopeChange || start == Event::FromEmpty;
        const bool e_ok = end == Event::SlopeChange || end == Event::ToEmpty;
        return s_ok && e_ok;
    };

    std::vector<WholeEdgeSample> whole;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const Segment& seg = segments[k];
        if (seg.kind == SegmentKind::Curve && seg.n_reports < params.min_len)
            ++out.diagnostics.discarded_short;
        if (seg.kind != SegmentKind::Linear) continue;
        if (seg.n_reports < params.min_len) continue;
        if (qualifies(seg.start_event, seg.end_event))
            whole.push_back({seg.t_e - seg.t_s, seg.slope, trace.sensor_id,
                             static_cast<int>(k)});
        else
            out.slopes.push_back({seg.slope, trace.sensor_id, static_cast<int>(k)});
        if (seg.merged) ++out.diagnostics.merged_gaps;
    }

    const auto is_linear = [&](std::size_t k) {
        return segments[k].kind == SegmentKind::Linear &&
               segments[k].n_reports >= params.min_len;
    };
    const auto contiguous = [&](std::size_t a, std::size_t b) {
        return segments[a].parts.back().second + 1 == segments[b].parts.front().first;
    };

    // Consecutive slopes around one vertex: adjacent linear segments, or
    // separated by one curve. A dropout gap may only be crossed when
    // merging is off (the paper's raw behaviour); zero runs never pair.
    std::vector<VertexSample> pairs;
    for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
        if (!is_linear(k)) continue;
        std::size_t m = k + 1;
        if (!contiguous(k, m)) continue;  // an empty stretch separates the runs
        const SegmentKind between = segments[m].kind;
        if (between == SegmentKind::Curve ||
            (between == SegmentKind::Gap && !params.merge_gap_segments)) {
            if (m + 1 >= segments.size() || !contiguous(m, m + 1)) continue;
            ++m;
        } else if (between != SegmentKind::Linear) {
            continue;
        }
        if (!is_linear(m)) continue;
        pairs.push_back({segments[k].slope, segments[m].slope, trace.sensor_id,
                         static_cast<int>(k), static_cast<int>(m)});
    }

    for (const auto& w : whole) {
        for (const auto& p : pairs) {
            if (p.left_segment == w.segment)
                out.edge_vertex.push_back({w.l_d, w.s_d, p.s_right, true, trace.sensor_id});
            else if (p.right_segment == w.segment)
                out.edge_vertex.push_back({w.l_d, w.s_d, p.s_left, false, trace.sensor_id});
        }
    }

    out.whole.insert(out.whole.end(), whole.begin(), whole.end());
    out.vertices.insert(out.vertices.end(), pairs.begin(), pairs.end());

    for (const auto& s : trace.samples) {
        ++out.diagnostics.reports;
        if (!s.dropped && s.reading) ++out.diagnostics.detection_reports;
    }
}

void analyze_trace(const DistanceTrace& trace, const SegmentationParams& params,
                   double sigma_slope, Rng& noise_rng, SampleSet& out) {
    std::vector<Segment> segments = segment_trace(trace, params);
    apply_slope_noise(segments, sigma_slope, noise_rng);
    extract_samples(segments, trace, params, out);
}

}  // namespace shapesense
