#!/usr/bin/env node
import { readFileSync } from 'fs'
import { render } from './render'
import type { CurveSpec } from './types'

export function main(argv: string[]): number {
  if (argv.length !== 2) {
    console.error('usage: plots <curve_spec.json> <out.svg>')
    return 2
  }
  const [specPath, rawOut] = argv
  let spec: CurveSpec
  try {
    spec = JSON.parse(readFileSync(specPath, 'utf8'))
  } catch (err) {
    console.error(`cannot read curve spec: ${(err as Error).message}`)
    return 2
  }
  if (!spec.csv || !spec.metric) {
    console.error('curve spec needs "csv" and "metric" fields')
    return 2
  }
  // the renderer emits SVG; steer mismatched extensions there
  let outPath = rawOut
  if (outPath.endsWith('.png')) {
    outPath = outPath.slice(0, -4) + '.svg'
    console.error(`note: raster output unavailable, writing ${outPath}`)
  }
  try {
    render(spec, outPath)
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`)
    return 1
  }
  console.log(outPath)
  return 0
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)))
}
