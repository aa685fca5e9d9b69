"""命令行场景运行与报告输出模块"""
