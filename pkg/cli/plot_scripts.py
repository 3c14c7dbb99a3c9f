"""
gnuplot 绘图脚本（仅生成文本，不依赖图形库）
"""

_HEADER = """set datafile separator ","
set datafile commentschars "#"
set key outside right
set grid
"""


def rate_script(csv_name: str) -> str:
    blocks = []
    for scenario in ("IntraRack", "InterRack", "CrossDC"):
        for arch in ("NoQfcSingle", "QfcSingle", "RqiDwdm"):
            blocks.append(
                f"'{csv_name}' using ((strcol(1) eq '{scenario}' && strcol(2) eq '{arch}') ? $3 : 1/0):"
                f"($6/1e3) every ::1 with linespoints title '{scenario} {arch}'")
    return (_HEADER + "set logscale xy\nset xlabel 'N_tot'\nset ylabel 'rate (kHz)'\n"
            "set terminal pngcairo size 1000,700\nset output 'rate.png'\nplot " + ", \\\n     ".join(blocks) + "\n")


def fidelity_script(csv_name: str) -> str:
    blocks = [
        f"'{csv_name}' using ((strcol(1) eq '{arch}') ? $2 : 1/0):3 every ::1 with linespoints title '{arch}'"
        for arch in ("NoQfcSingle", "QfcSingle", "RqiDwdm")
    ]
    return (_HEADER + "set xlabel 'nodes'\nset ylabel 'fidelity'\n"
            "set terminal pngcairo size 1000,700\nset output 'fidelity.png'\nplot " + ", \\\n     ".join(blocks) + "\n")


def raman_script(csv_name: str, temperature: float) -> str:
    blocks = [
        f"'{csv_name}' using ((strcol(6) eq '{branch}' && $4 == {temperature:g}) ? $1 : 1/0):5 "
        f"every ::1 with lines title '{branch} {temperature:g} K'"
        for branch in ("stokes", "antistokes")
    ]
    return (_HEADER + "set logscale y\nset xlabel 'pump wavelength (nm)'\n"
            "set ylabel 'NSD (photons/s/nm)'\n"
            "set terminal pngcairo size 1000,700\nset output 'raman.png'\nplot " + ", \\\n     ".join(blocks) + "\n")
