"""Test packages"""
