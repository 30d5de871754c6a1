import { readFileSync } from 'fs'
import Papa from 'papaparse'
import type { ResultRow } from './types'

const REQUIRED = ['t', 'metric', 'mean', 'stderr', 'n_effective', 'model', 'd', 'seed']

export function parseResultCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  })
  if (parsed.errors.length > 0) {
    throw new Error(`malformed CSV: ${parsed.errors[0].message} (row ${parsed.errors[0].row})`)
  }
  const fields = parsed.meta.fields ?? []
  for (const col of REQUIRED) {
    if (!fields.includes(col)) throw new Error(`malformed CSV: missing column '${col}'`)
  }
  return parsed.data.map((r, i) => {
    const row: ResultRow = {
      t: Number(r.t),
      metric: r.metric,
      mean: Number(r.mean),
      stderr: Number(r.stderr),
      n_effective: Number(r.n_effective),
      model: r.model,
      d: Number(r.d),
      seed: Number(r.seed),
    }
    if (!Number.isFinite(row.t) || !Number.isFinite(row.mean)) {
      throw new Error(`malformed CSV: non-numeric t/mean at data row ${i + 1}`)
    }
    return row
  })
}

export function loadResultCsv(path: string): ResultRow[] {
  return parseResultCsv(readFileSync(path, 'utf8'))
}

export function selectMetric(rows: ResultRow[], metric: string): ResultRow[] {
  const out = rows.filter((r) => r.metric === metric)
  out.sort((a, b) => a.t - b.t)
  return out
}
