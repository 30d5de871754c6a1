import type { FitKind, FitResult } from './types'

/** Least squares on y = a + b x; returns [a, b]. */
function linfit(xs: number[], ys: number[]): [number, number] {
  const n = xs.length
  const mx = xs.reduce((s, v) => s + v, 0) / n
  const my = ys.reduce((s, v) => s + v, 0) / n
  let sxx = 0
  let sxy = 0
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - mx) * (xs[i] - mx)
    sxy += (xs[i] - mx) * (ys[i] - my)
  }
  const b = sxx > 0 ? sxy / sxx : 0
  return [my - b * mx, b]
}

function rms(res: number[]): number {
  return Math.sqrt(res.reduce((s, v) => s + v * v, 0) / res.length)
}

/** points: strictly positive (t, mean) pairs, t > 0. */
export function powerFit(points: Array<[number, number]>): FitResult {
  const xs = points.map(([t]) => Math.log(t))
  const ys = points.map(([, m]) => Math.log(m))
  const [a, b] = linfit(xs, ys)
  const residual = rms(ys.map((y, i) => y - (a + b * xs[i])))
  const gamma = -b
  const c = Math.exp(a)
  return {
    kind: 'power',
    gamma,
    c,
    rate: 1,
    residual,
    curve: points.map(([t]) => [t, c * Math.pow(t, -gamma)]),
  }
}

const GAMMA_GRID: number[] = []
for (let g = 0.1; g <= 1.0 + 1e-9; g += 0.05) GAMMA_GRID.push(Number(g.toFixed(2)))

/** Grid search over gamma, linear fit of log(mean) against t^gamma. */
export function stretchedExpFit(points: Array<[number, number]>): FitResult {
  const ys = points.map(([, m]) => Math.log(m))
  let best: FitResult | null = null
  for (const gamma of GAMMA_GRID) {
    const xs = points.map(([t]) => Math.pow(t, gamma))
    const [a, b] = linfit(xs, ys)
    const residual = rms(ys.map((y, i) => y - (a + b * xs[i])))
    if (best === null || residual < best.residual) {
      const c = Math.exp(a)
      const rate = -b
      best = {
        kind: 'stretched_exp',
        gamma,
        c,
        rate,
        residual,
        curve: points.map(([t]) => [t, c * Math.exp(-rate * Math.pow(t, gamma))]),
      }
    }
  }
  return best as FitResult
}

export function fitCurve(kind: FitKind, points: Array<[number, number]>): FitResult | null {
  const positive = points.filter(([t, m]) => t > 0 && m > 0)
  if (kind === 'none') return null
  if (positive.length < 2) {
    throw new Error(`fit needs at least 2 strictly positive points, got ${positive.length}`)
  }
  return kind === 'power' ? powerFit(positive) : stretchedExpFit(positive)
}
