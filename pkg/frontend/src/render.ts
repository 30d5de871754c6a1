import * as echarts from 'echarts'
import { writeFileSync } from 'fs'
import { loadResultCsv, selectMetric } from './csv'
import { fitCurve } from './fit'
import type { CurveSpec, ResultRow } from './types'

function bandSeries(rows: ResultRow[], logY: boolean) {
  // stacked-line trick: invisible base at mean - 2se, shaded 4se on top
  const floor = (v: number) => (logY ? Math.max(v, 1e-12) : v)
  const lower = rows.map((r) => [r.t, floor(r.mean - 2 * r.stderr)])
  const width = rows.map((r, i) => [r.t, r.mean + 2 * r.stderr - (lower[i][1] as number)])
  return [
    {
      name: 'band-lower',
      type: 'line',
      data: lower,
      stack: 'band',
      symbol: 'none',
      lineStyle: { opacity: 0 },
      tooltip: { show: false },
    },
    {
      name: 'mean ± 2·stderr',
      type: 'line',
      data: width,
      stack: 'band',
      symbol: 'none',
      lineStyle: { opacity: 0 },
      areaStyle: { color: '#5470c6', opacity: 0.18 },
    },
  ]
}

export function render(spec: CurveSpec, outPath: string): string {
  const rows = loadResultCsv(spec.csv)
  const main = selectMetric(rows, spec.metric)
  if (main.length === 0) {
    throw new Error(`no rows for metric '${spec.metric}' in ${spec.csv}`)
  }
  const scale = spec.scale ?? 'linear'
  const logY = scale === 'log-y' || scale === 'log-log'
  const logX = scale === 'log-log'
  const usable = logX ? main.filter((r) => r.t > 0) : main
  const points: Array<[number, number]> = usable.map((r) => [r.t, r.mean])

  const fit = fitCurve(spec.fit ?? 'none', points)
  const series: any[] = [...bandSeries(usable, logY)]
  series.push({
    name: spec.metric,
    type: 'line',
    data: points,
    symbol: 'circle',
    symbolSize: 5,
    lineStyle: { width: 2 },
  })
  for (const overlay of spec.overlays ?? []) {
    const o = selectMetric(rows, overlay).filter((r) => !logX || r.t > 0)
    if (o.length === 0) continue
    series.push({
      name: overlay,
      type: 'line',
      data: o.map((r) => [r.t, r.mean]),
      symbol: 'none',
      lineStyle: { type: 'dashed', width: 1.5 },
    })
  }
  let subtext = `${usable[0].model}, d=${usable[0].d}, seed=${usable[0].seed}`
  if (fit !== null) {
    series.push({
      name: `${fit.kind} fit`,
      type: 'line',
      data: fit.curve,
      symbol: 'none',
      lineStyle: { type: 'dotted', width: 1.5, color: '#333' },
    })
    const shape = fit.kind === 'power' ? 't^-γ' : 'exp(-c·t^γ)'
    subtext += `  |  ${shape} fit: γ̂=${fit.gamma.toFixed(3)}, residual=${fit.residual.toExponential(2)}`
  }

  const chart = echarts.init(null as any, null, {
    renderer: 'svg',
    ssr: true,
    width: 900,
    height: 560,
  })
  chart.setOption({
    animation: false,
    title: { text: spec.title ?? spec.metric, subtext },
    legend: { top: 48, data: series.map((s) => s.name).filter((n) => n !== 'band-lower') },
    grid: { top: 96, left: 64, right: 24, bottom: 48 },
    xAxis: { type: logX ? 'log' : 'value', name: 't' },
    yAxis: { type: logY ? 'log' : 'value', name: spec.metric },
    series,
  })
  const svg = (chart as any).renderToSVGString()
  chart.dispose()
  writeFileSync(outPath, svg)
  return outPath
}
