export interface ResultRow {
  t: number
  metric: string
  mean: number
  stderr: number
  n_effective: number
  model: string
  d: number
  seed: number
}

export type Scale = 'linear' | 'log-y' | 'log-log'
export type FitKind = 'none' | 'power' | 'stretched_exp'

export interface CurveSpec {
  csv: string
  metric: string
  scale?: Scale
  fit?: FitKind
  overlays?: string[]
  title?: string
}

export interface FitResult {
  kind: FitKind
  gamma: number
  /** prefactor c in c*t^{-gamma} or c*exp(-rate*t^gamma) */
  c: number
  /** decay rate for the stretched-exponential shape (1 for power) */
  rate: number
  /** RMS residual of the fit on the log scale */
  residual: number
  /** fitted curve evaluated on the data grid */
  curve: Array<[number, number]>
}
