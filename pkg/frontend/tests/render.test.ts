import { describe, expect, it } from 'vitest'
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { main } from '../src/cli'
import { render } from '../src/render'

const FIXTURE = join(__dirname, 'fixtures', 'perturbation.csv')

function tmp(name: string): string {
  return join(mkdtempSync(join(tmpdir(), 'plots-')), name)
}

describe('render', () => {
  it('renders the perturbation fixture with overlays end to end', () => {
    const out = tmp('pert.svg')
    render(
      {
        csv: FIXTURE,
        metric: 'l1',
        scale: 'log-log',
        fit: 'power',
        overlays: ['alpha_Y_nt', 'bound_shape'],
        title: 'perturbed vs stationary',
      },
      out,
    )
    const svg = readFileSync(out, 'utf8')
    expect(svg.startsWith('<svg')).toBe(true)
    expect(svg).toContain('alpha_Y_nt')
    expect(svg).toContain('γ̂=')
  })

  it('renders a linear plot without fit', () => {
    const out = tmp('plain.svg')
    render({ csv: FIXTURE, metric: 'l1' }, out)
    expect(existsSync(out)).toBe(true)
  })

  it('fails on an empty metric selection', () => {
    expect(() => render({ csv: FIXTURE, metric: 'nope' }, tmp('x.svg'))).toThrow(
      'no rows for metric',
    )
  })
})

describe('cli', () => {
  it('runs end to end and redirects png extensions to svg', () => {
    const dir = mkdtempSync(join(tmpdir(), 'plots-cli-'))
    const specPath = join(dir, 'spec.json')
    writeFileSync(
      specPath,
      JSON.stringify({ csv: FIXTURE, metric: 'l1', fit: 'power', overlays: ['alpha_Y_nt'] }),
    )
    const code = main([specPath, join(dir, 'out.png')])
    expect(code).toBe(0)
    expect(existsSync(join(dir, 'out.svg'))).toBe(true)
  })

  it('exits 2 on usage errors', () => {
    expect(main([])).toBe(2)
    expect(main(['/nonexistent.json', 'out.svg'])).toBe(2)
  })

  it('exits 1 on render failures', () => {
    const dir = mkdtempSync(join(tmpdir(), 'plots-cli-'))
    const specPath = join(dir, 'spec.json')
    writeFileSync(specPath, JSON.stringify({ csv: FIXTURE, metric: 'absent' }))
    expect(main([specPath, join(dir, 'out.svg')])).toBe(1)
  })
})
